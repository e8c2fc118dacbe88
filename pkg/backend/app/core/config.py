from __future__ import annotations

import os

from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


class Settings:
    APP_NAME = "jn-lab"

    def __init__(self) -> None:
        self.reload()

    def reload(self) -> None:
        # Hard cap on n for anything that materializes a 2^n x n sign matrix.
        self.N_MAX = _int_env("JN_LAB_NMAX", 20)
        self.ORACLE_CAP = _int_env("JN_LAB_ORACLE_CAP", 14)
        self.BRUTE_CAP = _int_env("JN_LAB_BRUTE_CAP", 4)
        self.DEFAULT_DIGITS = _int_env("JN_LAB_DIGITS", 50)
        self.JOBS = max(1, _int_env("JN_LAB_JOBS", 1))
        self.LOG_LEVEL = os.getenv("JN_LAB_LOG_LEVEL", "WARNING").strip().upper() or "WARNING"


settings = Settings()
