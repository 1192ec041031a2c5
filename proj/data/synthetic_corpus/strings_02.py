text = "Lorem, ipsum"
text.strip().replace("__", "-").upper()
"__".join(text.strip().split("-")).lower()
text.strip().lower().replace(" ", "-")
text.upper().replace(" ", "-").strip()
text.lower().strip().split("-")
out = text.lower().replace(" ", "-")
