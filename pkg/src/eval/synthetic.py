"""
Synthetic dialogs whose labels follow a first-order Markov chain.

Each segment carries its label's cue word with probability `cue_prob` plus a
few label-independent filler words, so the text alone is weak evidence and
the previous label is strong evidence.
"""

from typing import NamedTuple

import numpy as np

from ..corpus.models import Corpus, Dialog, Segment, TagsetVariant, build_corpus


class BayesRates(NamedTuple):
    """Best achievable accuracy without and with the previous label."""

    without_context: float
    with_previous_label: float


def transition_matrix(n_labels: int, shift_prob: float) -> np.ndarray:
    """Uniform mixing plus a deterministic step to the next label."""
    matrix = np.full((n_labels, n_labels), (1.0 - shift_prob) / n_labels)
    for label in range(n_labels):
        matrix[label, (label + 1) % n_labels] += shift_prob
    return matrix


def stationary_distribution(matrix: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eig(matrix.T)
    vector = np.real(vectors[:, np.argmin(np.abs(values - 1.0))])
    return vector / vector.sum()


def markov_bayes_rates(n_labels: int = 4, shift_prob: float = 0.8, cue_prob: float = 0.3) -> BayesRates:
    """
    Accuracy ceilings in the chain's steady state: a present cue identifies
    the label, otherwise the best guess is the most likely label overall or
    the most likely successor of the previous label.
    """
    matrix = transition_matrix(n_labels, shift_prob)
    pi = stationary_distribution(matrix)
    without = cue_prob + (1.0 - cue_prob) * float(pi.max())
    with_previous = cue_prob + (1.0 - cue_prob) * float(pi @ matrix.max(axis=1))
    return BayesRates(without, with_previous)


def generate_markov_corpus(
    n_dialogs: int = 100,
    dialog_length: int = 50,
    n_labels: int = 4,
    shift_prob: float = 0.8,
    cue_prob: float = 0.3,
    vocabulary: int = 20,
    filler_words: int = 3,
    seed: int = 0,
) -> Corpus:
    """Dialogs 'm0000', 'm0001', ... with labels 'l0'..'l{n-1}' and alternating speakers."""
    rng = np.random.default_rng(seed)
    matrix = transition_matrix(n_labels, shift_prob)
    labels = tuple(f"l{i}" for i in range(n_labels))

    dialogs = []
    for d in range(n_dialogs):
        dialog_id = f"m{d:04d}"
        label = int(rng.integers(n_labels))
        segments = []
        for position in range(dialog_length):
            if position:
                label = int(rng.choice(n_labels, p=matrix[label]))
            words = [f"w{int(j)}" for j in rng.integers(vocabulary, size=filler_words)]
            if rng.random() < cue_prob:
                words.insert(int(rng.integers(len(words) + 1)), f"cue{label}")
            segments.append(
                Segment(
                    dialog_id=dialog_id,
                    speaker="AB"[position % 2],
                    index=position,
                    raw_text=" ".join(words),
                    label=labels[label],
                )
            )
        dialogs.append(Dialog(dialog_id, tuple(segments)))

    return build_corpus(dialogs, TagsetVariant.ISO_TASK, label_set=labels)
