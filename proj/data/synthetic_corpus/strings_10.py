line = "x_y__z"
line.replace("_", ".").replace("--", ".").strip()
line.replace("--", ".").strip().lower()
"--".join(line.strip().split(".")).lower()
line.strip().replace("--", ".").upper()
line.lower().replace("_", ".").strip()
line.strip().lower().replace("_", ".")
out = line.strip().lower()
