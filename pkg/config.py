import os
from dotenv import load_dotenv

load_dotenv()

# Data Configuration
DATA_PATH = os.getenv("DERM2VEC_DATA_PATH", "data/dermatology.data")
DATA_SCHEMA = os.getenv("DERM2VEC_DATA_SCHEMA", "compact")  # 'compact' or 'uci_release'

# Experiment Configuration
MASTER_SEED = int(os.getenv("DERM2VEC_SEED", "42"))
CV_FOLDS = 10
OUTPUT_DIR = os.getenv("DERM2VEC_OUTPUT_DIR", "results")
MAX_JOBS = int(os.getenv("DERM2VEC_JOBS", "1"))

# Training defaults (the classifier and the autoencoder share them unless overridden)
EPOCHS = 100
BATCH_SIZE = 16
LEARNING_RATE = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# Numerical floors
LOG_FLOOR = 1e-12  # cross-entropy log clamp
NB_VAR_SMOOTHING = 1e-9  # relative to the largest feature variance

# Autoencoder Configuration
ENCODER_WIDTHS = (200, 100, 50)
ENCODING_DIM = 32

# Classes in label order 1..6
CLASS_NAMES = (
    "psoriasis",
    "seboreic dermatitis",
    "lichen planus",
    "pityriasis rosea",
    "chronic dermatitis",
    "pityriasis rubra pilaris",
)
N_CLASSES = len(CLASS_NAMES)

# Report file names
CV_REPORTS_FILE = "cv_reports.csv"
TOOL_VERSION = "1.0.0"
