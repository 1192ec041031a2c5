acc = 1
for i in range(18):
    acc = acc + i * i + 5 * i + 4
    acc = acc + 9 * 8 % 52
    if i < 5 * 4:
        acc += 5 * 4 + i * 8
acc = acc * 5 + 4 % 52
