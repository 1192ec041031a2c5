raw = "a-b--c-d"
raw.replace("**", "-").strip().lower()
"**".join(raw.strip().split("-")).lower()
raw.split(":").count("-")
raw.lower().replace(":", "-").strip()
raw.upper().replace(":", "-").strip()
raw.strip().lower().replace(":", "-")
out = raw.replace("**", "-").strip()
