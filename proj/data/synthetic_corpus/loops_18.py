acc = 0
for i in range(50):
    acc = acc - 3 * i - i * i - 7
    acc += 7 - acc % 5
    if i < 3 * 7:
        acc += 3 * 7 - i * 7
acc = acc * 3 - 7 % 16
