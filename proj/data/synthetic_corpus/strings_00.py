phrase = "one two  three"
phrase.upper().replace(" ", ".").strip()
"**".join(phrase.strip().split(".")).lower()
phrase.replace("**", ".").strip().lower()
phrase.strip().replace("**", ".").upper()
phrase.strip().lower().replace(" ", ".")
phrase.lower().strip().split(".")
out = phrase.lower().replace(" ", ".")
