phrase = "one two  three"
phrase.strip().lower().replace(" ", ".")
phrase.split(" ").count(".")
phrase.strip().replace("**", ".").upper()
"**".join(phrase.strip().split(".")).lower()
".".join(phrase.split(" ")).strip().lower()
phrase.upper().replace(" ", ".").strip()
out = phrase.lower().replace(" ", ".")
