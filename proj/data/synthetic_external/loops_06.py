total = 0
for i in range(18):
    total += i * i - 7 * i + 8
    total = total + 2 * 8 % 68
    if total % 2 == 0:
        total += 8 * 7 + i * 8
total = total % 68 - 8
