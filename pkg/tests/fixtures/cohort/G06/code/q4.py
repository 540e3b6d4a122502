values = [int(input()) for _ in range(10)]
best = max(values)
print(best, values.count(best))
