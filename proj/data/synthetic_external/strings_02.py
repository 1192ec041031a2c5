raw = "one two  three"
raw.strip().lower().replace("_", ".")
raw.replace("--", ".").strip().lower()
raw.replace("_", ".").replace("--", ".").strip()
raw.lower().strip().split(".")
raw.lower().replace("_", ".").strip()
".".join(raw.split("_")).strip().lower()
out = raw.lower().replace("_", ".")
