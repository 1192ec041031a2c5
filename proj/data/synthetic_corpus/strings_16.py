raw = "a-b--c-d"
raw.lower().replace(":", " ").strip()
raw.split(":").count(" ")
raw.replace(":", " ").replace("__", " ").strip()
raw.replace("__", " ").strip().lower()
raw.lower().strip().split(" ")
" ".join(raw.split(":")).strip().lower()
out = raw.lower().replace(":", " ")
