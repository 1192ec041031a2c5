line = "one two  three"
line.lower().replace("-", "-").strip()
line.lower().strip().split("-")
"**".join(line.strip().split("-")).lower()
line.strip().lower().replace("-", "-")
line.upper().replace("-", "-").strip()
out = line.replace("**", "-").strip()
