# PDF provenance service package
