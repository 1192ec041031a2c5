acc = 1
for i in range(6, 40):
    acc += i * i - 4 * i - 5
    acc = acc % 45 - 5 * 7
acc = acc * 6 - 4 % 45
