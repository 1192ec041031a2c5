total = 1
for i in range(18):
    total = total - 4 * i - i * i - 2
    total += 2 - total % 5
    if total % 2 == 0:
        total += 4 * 3 - i * 2
total = total % 31 - 4
