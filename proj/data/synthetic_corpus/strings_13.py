line = "x_y__z"
"__".join(line.strip().split(" ")).lower()
line.strip().lower().replace(",", " ")
line.replace("__", " ").strip().lower()
line.lower().replace(",", " ").strip()
out = line.strip().lower()
