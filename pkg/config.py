"""
Configuration management for the entanglement toolkit
Loads ambient settings (logging, monitoring, storage, threads) from environment variables.
Nothing here changes a computed result: experiment parameters are explicit CLI flags.
"""
import os
from dataclasses import dataclass
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

_LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


@dataclass
class LoggingConfig:
    """Logging configuration"""
    level: str
    log_file: str


@dataclass
class MonitoringConfig:
    """Error tracking configuration"""
    sentry_dsn: str


@dataclass
class StorageConfig:
    """Result storage configuration"""
    results_db_url: str  # empty disables storage unless --store is given


@dataclass
class RuntimeConfig:
    """Thread pool configuration for Monte Carlo shards"""
    workers: int


class Config:
    """
    Main configuration class
    """

    def __init__(self):
        self.logging = self._load_logging_config()
        self.monitoring = self._load_monitoring_config()
        self.storage = self._load_storage_config()
        self.runtime = self._load_runtime_config()

    @staticmethod
    def _load_logging_config() -> LoggingConfig:
        """Load logging configuration from environment"""
        return LoggingConfig(
            level=os.getenv('LOG_LEVEL', 'WARNING').upper(),
            log_file=os.getenv('LOG_FILE', '')
        )

    @staticmethod
    def _load_monitoring_config() -> MonitoringConfig:
        """Load monitoring configuration from environment"""
        return MonitoringConfig(sentry_dsn=os.getenv('SENTRY_DSN', ''))

    @staticmethod
    def _load_storage_config() -> StorageConfig:
        """Load storage configuration from environment"""
        return StorageConfig(results_db_url=os.getenv('RESULTS_DB_URL', ''))

    @staticmethod
    def _load_runtime_config() -> RuntimeConfig:
        """Load runtime configuration from environment"""
        raw = os.getenv('ENTANGLEMENT_WORKERS', '')
        try:
            workers = int(raw) if raw else (os.cpu_count() or 1)
        except ValueError:
            workers = 0  # reported by validate()
        return RuntimeConfig(workers=workers)

    def validate(self) -> list[str]:
        """
        Validate configuration and return list of errors

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = []

        if self.logging.level not in _LOG_LEVELS:
            errors.append(f"LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)}")

        if self.runtime.workers < 1:
            errors.append("ENTANGLEMENT_WORKERS must be a positive integer")

        url = self.storage.results_db_url
        if url and not (url.startswith('sqlite') or url.startswith('postgresql')):
            errors.append("RESULTS_DB_URL must be a sqlite:// or postgresql:// URL")

        return errors


# Global config instance
config = Config()
