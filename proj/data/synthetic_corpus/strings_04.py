line = "x_y__z"
line.lower().replace(",", "-").strip()
line.strip().lower().replace(",", "-")
line.lower().strip().split("-")
line.replace(",", "-").replace("--", "-").strip()
out = line.strip().lower()
