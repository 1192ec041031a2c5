acc = 0
for i in range(8, 18, 4):
    acc += i * i + 4 * i + 2
    acc = acc + 6 * 2 % 39
acc = acc % 39 + 8
