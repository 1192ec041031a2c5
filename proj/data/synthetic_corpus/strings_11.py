phrase = "one two  three"
phrase.lower().strip().split(".")
phrase.lower().replace(" ", ".").strip()
".".join(phrase.split(" ")).strip().lower()
phrase.upper().replace(" ", ".").strip()
phrase.split(" ").count(".")
out = phrase.lower().replace(" ", ".")
