# Hypergraph Sampling
