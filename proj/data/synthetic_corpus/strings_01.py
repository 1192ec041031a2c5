raw = "x_y__z"
raw.replace(";", "_").replace("--", "_").strip()
"_".join(raw.split(";")).strip().lower()
raw.lower().strip().split("_")
raw.lower().replace(";", "_").strip()
raw.split(";").count("_")
raw.replace("--", "_").strip().lower()
out = raw.replace("--", "_").strip()
