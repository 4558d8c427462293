import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    # Where simulate and sweep write their files unless --out is given
    OUTPUT_DIR = os.environ.get('FAIRBANDITS_OUTPUT_DIR') or 'results'

    # Trial-level parallelism and the master seed used when a config has none
    JOBS = int(os.environ.get('FAIRBANDITS_JOBS') or 1)
    SEED = int(os.environ.get('FAIRBANDITS_SEED') or 7)

    LOG_LEVEL = os.environ.get('FAIRBANDITS_LOG_LEVEL') or 'INFO'

    # Version-space enumeration holds 2^d conjunctions
    MAX_ENUM_DIM = int(os.environ.get('FAIRBANDITS_MAX_ENUM_DIM') or 16)


class TestConfig(Config):
    TESTING = True
    LOG_LEVEL = 'WARNING'
    JOBS = 1
