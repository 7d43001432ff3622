"""
Splitting identifiers into query terms
======================================

Source code names concepts with compound identifiers. Splitting them gives
the vocabulary that both the index and the term graphs work with.
"""

from acer.corpus import PreprocessOptions, build_lexicon, original_tokens, preprocess_text, split_token

# %%
# Camel case, acronyms, digits and snake case all split on their boundaries.
for token in ("resolveRuntimeClasspathEntry", "getChatRoomBots", "reverse_traversal", "XMLParser2"):
    print(f"{token:30} -> {split_token(token)}")

# %%
# Same-case tokens carry no boundary marks. A lexicon of words mined from
# camel case splits elsewhere in the code lets them split too.
lexicon = build_lexicon(["decimalValue valueType", "DecimalFormat typeName"])
print(split_token("DECIMALTYPE"), "->", split_token("DECIMALTYPE", lexicon))

# %%
# Preprocessing drops stopwords, Java keywords and short terms, and can stem.
line = "public static IRuntimeClasspathEntry[] resolveRuntimeClasspathEntry(IJavaProject project)"
print(preprocess_text(line))
print(preprocess_text(line, PreprocessOptions(stemming=True)))

# %%
# Structured tokens (two or more valid terms) are also kept whole, so an
# exact identifier in a query can match its declaration.
print(original_tokens(line))
