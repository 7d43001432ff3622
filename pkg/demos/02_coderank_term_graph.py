"""
Ranking terms with CodeRank
===========================

Terms that appear next to each other inside one identifier are linked in
an undirected graph. CodeRank then scores each term by the scores of its
neighbours, much like PageRank scores web pages.
"""

from acer.graph import TermGraph, build_term_graph, code_rank, dump_graph, top_k_terms

# %%
# A handful of signature tokens: "classpath" and "entry" co-occur often.
tokens = ["resolveRuntimeClasspathEntry", "IRuntimeClasspathEntry", "getClasspathEntries",
          "classpathEntryKind", "IJavaProject"]
graph = build_term_graph(tokens)
print("edges:", graph.edges())

# %%
# Iterate to the fixed point and look at the best connected terms.
result = code_rank(graph)
print(f"converged={result.converged} after {result.iterations_used} iterations")
for term, score in sorted(result.scores.items(), key=lambda kv: -kv[1]):
    print(f"  {term:12} {score:.4f}")
print("top 3 excluding 'java':", top_k_terms(result, 3, exclude={"java"}))

# %%
# Small graphs with known answers: a lone vertex keeps 1 - 0.85, a linked
# pair settles at 1.0 each and the middle of a path collects the most.
g = TermGraph()
g.add_edge("left", "middle")
g.add_edge("middle", "right")
print(code_rank(g).scores)

# %%
# Graphs and scores can be dumped as JSON for inspection.
print(dump_graph(g, code_rank(g))[:200], "...")
