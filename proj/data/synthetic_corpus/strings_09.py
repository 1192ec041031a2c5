raw = "x_y__z"
".".join(raw.split("-")).strip().lower()
raw.replace("-", ".").replace("--", ".").strip()
raw.split("-").count(".")
raw.lower().replace("-", ".").strip()
out = raw.lower().replace("-", ".")
