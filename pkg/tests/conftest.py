import io
import os

import pytest
import yaml

from src.corpus.io import write_segments
from src.corpus.switchboard import parse_switchboard
from src.eval.synthetic import generate_markov_corpus

# Transcript excerpt with one act label per line; the "+" line continues
# speaker B's first segment.
EXCERPT_UTT = """\
b          A.1 utt1: Okay. /
%-         A.1 utt2: {D So, }
sv         B.2 utt1: [ [ I guess, +
qw         A.3 utt1: What kind of experience [ do you, + do you ] have, then with child care?
+          B.4 utt1: I think, ] + {F uh, } I wonder ] if that worked. /
qy         A.5 utt1: Does it say something? /
sd         B.6 utt1: I think it usually does. /
ad         B.6 utt2: You might try, {F uh, } /
h          B.6 utt3: I don't know, /
ad         B.6 utt4: hold it down a little longer, /
%-         B.6 utt5: {C and } see if it, {F uh, } -/
b          A.7 utt1: Okay <beep>. /
"""

EXCERPT_SPEAKERS = list("AABABABBBBBA")

UTT_HEADER = """\
FILENAME:	4325_1632_1519
TOPIC#:		323
=========================================================================

"""

LEGO_TABLE = """\
call_id,turn_index,side,transcript,da_label
c1,0,System,Welcome to the CMU Let's Go bus information system.,Inform Welcome
c1,0,System,What can I do for you?,Ask Query
c1,1,User,PENN AT BUTLER,Place Information
c1,2,System,Leaving from OAKLAND . Is this correct?,Ask Confirm Departure Place
c1,3,User,YES,Confirm Departure Place
c2,0,System,Where do you want to go?,Ask Destination
c2,1,User,SQUIRREL HILL,Place Information
"""

DIALOGBANK_TSV = (
    "dialog_id\tseg_id\tspeaker\ttext\ttask\tautoFeedback\tturnManagement\n"
    "d1\ts1\tP1\twhat time does it leave\tsetQuestion\t\tturnTake\n"
    "d1\ts2\tP2\tuh\t\t\tturnTake\n"
    "d1\ts3\tP2\tat nine\tanswer\tautoPositive\t\n"
    "d2\ts1\tP1\tclose the door\tinstruct\t\t\n"
    "d2\ts2\tP2\tokay\t\tautoPositive\t\n"
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keep the developer's DACT_* and LOG_* settings out of every test."""
    for name in list(os.environ):
        if name.startswith("DACT_") or name in ("LOG_LEVEL", "LOG_FORMAT"):
            monkeypatch.delenv(name, raising=False)


@pytest.fixture
def excerpt_dialog():
    """The 12-segment transcript excerpt as a parsed dialog"""
    return parse_switchboard(io.StringIO(EXCERPT_UTT), "sw4325")


@pytest.fixture
def swda_dir(tmp_path):
    """A directory with the excerpt (header included) and a second dialog"""
    directory = tmp_path / "swda"
    directory.mkdir()
    (directory / "sw4325.utt").write_text(UTT_HEADER + EXCERPT_UTT, encoding="utf-8")
    (directory / "sw2001.utt").write_text(
        "qy   A.1 utt1: Do you have kids? /\n"
        "ny   B.2 utt1: Yes, /\n"
        "+    A.3 utt1: {F uh, } how old? /\n"
        "sd   B.4 utt1: two boys. /\n",
        encoding="utf-8",
    )
    return directory


@pytest.fixture
def lego_file(tmp_path):
    path = tmp_path / "lego.csv"
    path.write_text(LEGO_TABLE, encoding="utf-8")
    return path


@pytest.fixture
def dialogbank_file(tmp_path):
    path = tmp_path / "dialogbank.tsv"
    path.write_text(DIALOGBANK_TSV, encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def markov_corpus():
    """Small first-order Markov corpus: 12 dialogs of 20 segments"""
    return generate_markov_corpus(n_dialogs=12, dialog_length=20, cue_prob=0.5, seed=7)


@pytest.fixture
def segments_file(tmp_path, markov_corpus):
    """The Markov corpus dumped as segment TSV"""
    path = tmp_path / "markov.tsv"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        write_segments(markov_corpus, f)
    return path


@pytest.fixture
def run_config(tmp_path, segments_file):
    """Configuration file for a fast 3-fold run over the segment TSV"""
    config = {
        "seed": 3,
        "corpus": {"paths": [str(segments_file)], "format": "segments"},
        "solver": {"cost": 0.1, "stop_tol": 0.01, "max_epochs": 200},
        "experiment": {
            "kind": "influence",
            "context_modes": ["untagged", "tagged", "labels"],
            "n_prev": [0, 1, 2],
            "folds": 3,
        },
        "output": {"dir": str(tmp_path / "out")},
        "logging": {"level": "WARNING", "format": "text"},
    }
    path = tmp_path / "config.yaml"
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(config, f)
    return path
