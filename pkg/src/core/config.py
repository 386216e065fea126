from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file='.env',
        env_file_encoding='utf-8',
        case_sensitive=True,
        env_ignore_empty=True,
        extra='ignore',
    )

    # Project Details
    PROJECT_NAME: str = 'microchain-lab'
    PROJECT_VERSION: str = '0.1.0'
    PROJECT_DESCRIPTION: str = 'Consensus-protocol laboratory on a simulated network'
    # Environment
    ENVIRONMENT: Literal['dev', 'prod'] = 'dev'
    DEBUG: bool = False
    LOG_LEVEL: Literal['DEBUG', 'INFO', 'WARNING', 'ERROR'] = 'WARNING'
    # Run registry
    DATABASE_URL: str = 'sqlite:///microchain_runs.sqlite'
    # Simulation
    SIGNATURE_SCHEME: Literal['ed25519', 'sim-hash'] = 'ed25519'
    OUTPUT_DIR: str = 'runs'
    MAX_WORKERS: int = 1


app_settings = Settings()
