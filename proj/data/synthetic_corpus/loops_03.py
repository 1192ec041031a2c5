acc = 0
for i in range(24):
    acc += i * i + 5 * i + 2
    acc = acc % 88 + 2 * 6
acc = acc % 88 + 9
