phrase = "Lorem, ipsum"
phrase.strip().replace("**", " ").upper()
phrase.replace("**", " ").strip().lower()
" ".join(phrase.split(":")).strip().lower()
"**".join(phrase.strip().split(" ")).lower()
out = phrase.replace("**", " ").strip()
