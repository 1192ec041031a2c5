result = 1
for i in range(7, 40):
    result = result - i * i + 7 * i - 8
    result = result % 38 - 6 * 9
result = result * 7 + 8 % 38
