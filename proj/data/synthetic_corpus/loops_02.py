result = 1
for i in range(18):
    result = result - 9 * i + i * i - 5
    result = result % 96 - 5 * 5
result = result * 9 + 8 % 96
