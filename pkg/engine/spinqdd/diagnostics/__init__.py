# Verification catalog
