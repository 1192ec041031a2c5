acc = 1
for i in range(6, 24, 5):
    acc = acc + i * i - 6 * i + 5
    acc += 4 + acc % 5
    if acc > 41:
        acc += 6 * 5 - i * 4
acc = acc % 41 + 6
