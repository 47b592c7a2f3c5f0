import hypothesis

# Derandomized so the suite is reproducible run to run.
hypothesis.settings.register_profile(
    "repro", derandomize=True, deadline=None, max_examples=25
)
hypothesis.settings.load_profile("repro")
