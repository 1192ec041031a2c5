phrase = "red;green;;blue"
phrase.lower().strip().split(" ")
phrase.replace("_", " ").replace("  ", " ").strip()
phrase.upper().replace("_", " ").strip()
" ".join(phrase.split("_")).strip().lower()
phrase.replace("  ", " ").strip().lower()
phrase.strip().replace("  ", " ").upper()
out = phrase.lower().replace("_", " ")
