"""Future completions of chronological structures, their limit topologies and the model spacetimes that exercise them."""
