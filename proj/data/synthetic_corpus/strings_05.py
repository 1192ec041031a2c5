line = "Alpha, Beta,  Gamma"
line.lower().strip().split(" ")
line.upper().replace(";", " ").strip()
line.strip().replace("__", " ").upper()
line.replace("__", " ").strip().lower()
line.lower().replace(";", " ").strip()
"__".join(line.strip().split(" ")).lower()
out = line.strip().lower()
