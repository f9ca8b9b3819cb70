# Scenario loading, runs and artifacts
