values = []
for _ in range(10):
    values.append(int(input()))
best = values[0]
count = 0
for v in values:
    if v > best:
        best = v
        count = 1
    elif v == best:
        count = count + 1
print(best, count)
