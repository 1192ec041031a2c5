raw = "Lorem, ipsum"
raw.replace("-", " ").replace("--", " ").strip()
raw.strip().replace("--", " ").upper()
raw.lower().strip().split(" ")
raw.upper().replace("-", " ").strip()
raw.lower().replace("-", " ").strip()
out = raw.replace("--", " ").strip()
