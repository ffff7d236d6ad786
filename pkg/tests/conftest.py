from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("lab", max_examples=50, derandomize=True, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
