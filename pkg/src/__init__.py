# glod-bench source tree
