"""Sampler configuration"""
import os
import tempfile


class SamplerConfig:
    """Process-wide sampler settings"""

    # Get from environment variables
    SIZE_GUARD = int(os.environ.get('PARTITION_SAMPLER_SIZE_GUARD', '20'))
    RESAMPLE_CAP = int(os.environ.get('PARTITION_SAMPLER_RESAMPLE_CAP', '10000'))
    INIT_RETRIES = int(os.environ.get('PARTITION_SAMPLER_INIT_RETRIES', '1000'))
    LOG_LEVEL = os.environ.get('PARTITION_SAMPLER_LOG_LEVEL', 'INFO')
    FLUSH_SIZE = int(os.environ.get('PARTITION_SAMPLER_FLUSH_SIZE', '500'))
    OUTPUT_DIR = os.environ.get('PARTITION_SAMPLER_OUTPUT_DIR', tempfile.gettempdir())

    # Output file names
    ENSEMBLE_FILE = 'ensemble.jsonl'
    STATS_FILE = 'stats.tsv'
    BALANCE_FILE = 'balance.csv'
    MIXING_FILE = 'mixing.csv'
    ACCEPTANCE_FILE = 'acceptance.csv'
    WORKBOOK_FILE = 'ensemble.xlsx'

    @staticmethod
    def get_run_dir(run_name: str) -> str:
        """Get output directory for a named run"""
        return os.path.join(SamplerConfig.OUTPUT_DIR, run_name)
