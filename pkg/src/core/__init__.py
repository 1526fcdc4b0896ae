# Graphs, TU dataset I/O, generators and the dataset registry
