import os
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]

# Decimal digits used for floating output (slash expansions, evaluation, L-functions).
PREC = int(os.environ.get("MF_PREC", "38"))

# Class-number table persistence; created on first save.
CACHE_DIR = Path(os.environ.get("MF_CACHE_DIR", str(REPO_ROOT / "bigdata" / "cache")))
CLASSNO_INITIAL = int(os.environ.get("MF_CLASSNO_INITIAL", "10000"))

VERBOSE = os.environ.get("MF_VERBOSE", "").strip().lower() in {"1", "true", "yes", "on"}

# Eigenform splitting: primes tried one by one, then small combinations.
SPLIT_PRIMES = 6
SPLIT_COEFF_BOUND = 3

HOST = "127.0.0.1"
PORT = int(os.environ.get("PORT", "3004"))
DEBUG = True
