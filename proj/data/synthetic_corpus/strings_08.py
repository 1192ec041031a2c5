line = "a-b--c-d"
".".join(line.split(" ")).strip().lower()
line.replace("  ", ".").strip().lower()
line.strip().replace("  ", ".").upper()
line.replace(" ", ".").replace("  ", ".").strip()
"  ".join(line.strip().split(".")).lower()
out = line.strip().lower()
