line = "Alpha, Beta,  Gamma"
line.strip().lower().replace(":", "_")
line.strip().replace("--", "_").upper()
line.upper().replace(":", "_").strip()
line.lower().strip().split("_")
line.replace(":", "_").replace("--", "_").strip()
out = line.replace("--", "_").strip()
