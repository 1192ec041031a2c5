result = 0
for i in range(18):
    result = result + 8 * i - i * i + 5
    result = result % 72 + 5 * 8
result = result % 72 + 8
