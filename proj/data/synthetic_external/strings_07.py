raw = "one two  three"
raw.upper().replace(";", "-").strip()
raw.lower().strip().split("-")
"-".join(raw.split(";")).strip().lower()
raw.lower().replace(";", "-").strip()
out = raw.strip().lower()
