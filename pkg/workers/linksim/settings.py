"""
Process-level settings for linksim.

Values come from ``LINKSIM_*`` environment variables or a ``.env`` file.
Experiment parameters live in ``io.schema.LinkConfig`` instead; these
settings only bound resources and numerical guards.
"""
from pydantic_settings import BaseSettings, SettingsConfigDict


class LinkSimSettings(BaseSettings):
    """Resource limits and numerical guards."""

    # MAP detection
    enumeration_budget: int = 2 ** 20   # max J^(Q/2) PAM vectors

    # LLR exchange
    llr_clip: float = 60.0

    # Monte-Carlo execution
    threads: int = 1
    batch_frames: int = 64
    progress: bool = True

    # Outputs
    output_dir: str = "results"

    model_config = SettingsConfigDict(
        env_prefix="LINKSIM_",
        env_file=".env",
        extra="ignore",
    )


settings = LinkSimSettings()
