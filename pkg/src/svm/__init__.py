"""One-vs-rest linear SVM trained by dual coordinate descent."""
