"""Feedback graphs, clique covers, and why greedy covers can waste cliques."""

from graphftrl.graph import (FeedbackGraph, cycle_graph, exact_min_cover, format_graph, greedy_clique_cover,
                             parse_graph, validate_cover)

# a path 2 - 0 - 1 - 3: greedy starts at arm 0 and grabs arm 1, stranding 2 and 3
path = FeedbackGraph.from_edges(4, [(0, 1), (0, 2), (1, 3)])
greedy, best = greedy_clique_cover(path), exact_min_cover(path)
print("greedy cover:", greedy.cliques, "->", greedy.num_cliques, "cliques")
print("exact cover: ", best.cliques, "->", best.num_cliques, "cliques")

# an odd cycle needs ceil(n/2) cliques
c5 = cycle_graph(5)
print("5-cycle minimum cover size:", exact_min_cover(c5).num_cliques)

# text round trip, and what validation reports for a bad cover
graph, cover = parse_graph("n = 3\nedge 0 1\nclique 0 2\nclique 1\n")
print(format_graph(graph, cover), end="")
print("validation:", validate_cover(graph, cover).message)
