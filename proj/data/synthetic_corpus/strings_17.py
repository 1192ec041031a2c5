phrase = "one two  three"
phrase.replace(" ", "-").replace("--", "-").strip()
"--".join(phrase.strip().split("-")).lower()
phrase.replace("--", "-").strip().lower()
phrase.upper().replace(" ", "-").strip()
out = phrase.lower().replace(" ", "-")
