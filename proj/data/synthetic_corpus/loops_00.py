acc = 0
for i in range(24):
    acc = acc - 2 * i + i * i - 6
    acc = acc + 2 * 6 % 98
    if acc > 98:
        acc += 2 * 4 + i * 6
acc = acc % 98 - 2
