acc = 1
for i in range(4, 50, 6):
    acc = acc + 4 * i - i * i + 5
    acc += 5 + acc % 3
    if i < 4 * 6:
        acc += 4 * 6 - i * 5
acc = acc % 53 + 4
