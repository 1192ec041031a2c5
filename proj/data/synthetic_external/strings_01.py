line = "red;green;;blue"
line.lower().strip().split("-")
line.replace("**", "-").strip().lower()
line.split(":").count("-")
"-".join(line.split(":")).strip().lower()
line.strip().replace("**", "-").upper()
out = line.strip().lower()
