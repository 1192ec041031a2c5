raw = "Alpha, Beta,  Gamma"
".".join(raw.split("-")).strip().lower()
raw.lower().replace("-", ".").strip()
raw.strip().replace("--", ".").upper()
"--".join(raw.strip().split(".")).lower()
raw.replace("-", ".").replace("--", ".").strip()
out = raw.strip().lower()
