"""scikit-learn accuracies on the surrogate dataset and its seed-42 split.

    build/tests/export_split /tmp/ref && python3 sklearn_reference.py /tmp/ref

Output is frozen in sklearn_reference.txt. Only DT, GNB and KNN are expected
to agree closely with the C++ learners; the others differ in optimizer.
"""
import sys

import numpy as np
import pandas as pd
from sklearn.ensemble import RandomForestClassifier
from sklearn.naive_bayes import GaussianNB
from sklearn.neighbors import KNeighborsClassifier
from sklearn.preprocessing import MinMaxScaler
from sklearn.tree import DecisionTreeClassifier

d = sys.argv[1]
data = pd.read_csv(f"{d}/surrogate.csv")
X = data[["N", "P", "K", "temperature", "humidity", "ph", "rainfall"]].values
y = data["label"].values
tr = np.loadtxt(f"{d}/train_idx.txt", dtype=int)
te = np.loadtxt(f"{d}/test_idx.txt", dtype=int)
scaler = MinMaxScaler().fit(X[tr])
Xtr, Xte = scaler.transform(X[tr]), scaler.transform(X[te])

models = [
    ("dt", DecisionTreeClassifier(random_state=42)),
    ("nb", GaussianNB()),
    ("knn", KNeighborsClassifier(n_neighbors=5)),
]
for seed in range(5):
    models.append((f"rf_seed{seed}", RandomForestClassifier(n_estimators=100, max_features=2, random_state=seed)))
for name, m in models:
    print(f"{name} {100 * m.fit(Xtr, y[tr]).score(Xte, y[te]):.2f}")
