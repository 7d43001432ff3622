"""Query reformulation for concept location using CodeRank and signatures."""
