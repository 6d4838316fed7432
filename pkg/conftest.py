pytest_plugins = ["warebench.testing"]
