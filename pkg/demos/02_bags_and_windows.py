"""The core mechanics: sliding windows, bags, the frequency db, and the
per-epoch change vectors whose cosine similarity decides when training stops.
"""

from boscids import (
    BehaviorDb,
    bag_of,
    cosine_similarity,
    db_diff,
    epoch_windows,
)

# a toy stream over 3 slots (say read=0, write=1, futex=2)
epoch_a = [0, 1, 0, 1, 2, 0, 1, 0, 1, 2, 0, 1]
epoch_b = [0, 1, 0, 1, 2, 0, 1, 2, 2, 0, 1, 0]
w, n_s = 4, 3

print(f"= windows of size {w} over epoch A (stride 1)")
for i, window in enumerate(epoch_windows(epoch_a, w)):
    print(f"  window {i}: {list(window)} -> bag {list(bag_of(window, n_s))}")

db = BehaviorDb()
snap0 = db.snapshot()
for window in epoch_windows(epoch_a, w):
    db.insert(bag_of(window, n_s))
change_1 = db_diff(snap0, db)
print(f"\n= after epoch A: {len(db)} distinct bags")
for bag, freq in db.items():
    print(f"  {list(bag)} x{freq}")
print(f"  change vector C_1 = {change_1.deltas.tolist()}")

snap1 = db.snapshot()
for window in epoch_windows(epoch_b, w):
    db.insert(bag_of(window, n_s))
change_2 = db_diff(snap1, db)
print(f"\n= after epoch B: {len(db)} distinct bags")
print(f"  change vector C_2 = {change_2.deltas.tolist()}")
print("  (C_2 is indexed by the db's insertion order after epoch B;")
print("   C_1 zero-extends over entries that did not exist yet)")

cos = cosine_similarity(change_2, change_1)
print(f"\n= cos(theta_2) = {cos:.6f}")
print("  training stops once this stays at or above the threshold")
print("  (default 0.99) for two consecutive epochs")

# the sum of each window's bag is always the window size
assert all(sum(bag_of(win, n_s)) == w for win in epoch_windows(epoch_a, w))
assert int(change_2.deltas.sum()) == len(epoch_b) - w + 1
print("\ninvariants hold: bags sum to w; C_k sums to windows-per-epoch")
