from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_prefix="GROWTHLAB_")

    log_level: str = "INFO"
    jobs: int = 1

    # truncation trust
    trust_margin: int = 10
    trust_decay_ratio: float = 0.5

    # sampling and search
    sphere_restarts: int = 32
    polish_tolerance: float = 1e-6
    proximity_samples: int = 4096
    points_per_radius: int = 64
    resample_rounds: int = 10
    cancellation_digits: float = 12.0
    underflow_log_floor: float = -1000.0
    denominator_floor: float = 1e-300
    resolution_tolerance: float = 0.05

    # growth functionals
    jensen_base_radius: float = 1.25
    counting_window: float = 1.25
    order_window: int = 4
    min_trusted_radii: int = 8
    max_finite_order: float = 12.0

    # verification thresholds
    inequality_slack: float = 1e-6
    wv_delta: float = 0.1
    eta_threshold: float = 0.1
    identity_tolerance: float = 1e-8
    hyper_order_tolerance: float = 0.3
    order_agreement_tolerance: float = 0.2
    exceptional_fraction: float = 0.2
    exceptional_factor: float = 10.0
    untrusted_abort_fraction: float = 0.5


settings = Settings()
