from hypothesis import HealthCheck, settings

# deterministic property-test runs; statistical tests carry their own seeds
settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")
