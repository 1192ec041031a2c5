result = 0
for i in range(50):
    result = result - i * i - 6 * i - 8
    result = result % 10 - 7 * 5
    if result > 10:
        result += 6 * 8 - i * 7
result = result * 6 - 8 % 10
