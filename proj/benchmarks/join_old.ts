# Old version of the join procedure, array traffic sliced away.
# Locations: l0 entry, l1 outer loop head, l2 inner loop head,
# l3 inner body, lout terminal.
vars lenA lenB i j cost;
init l0;
terminal lout;
theta0 lenA - 1 >= 0, 100 - lenA >= 0, lenB - 1 >= 0, 100 - lenB >= 0, cost >= 0, -cost >= 0;
trans l0 -> l1 update i := 0;
trans l1 -> lout guard i - lenA >= 0;
trans l1 -> l2 guard lenA - i - 1 >= 0 update j := 0;
trans l2 -> l1 guard j - lenB >= 0 update i := i + 1;
trans l2 -> l3 guard lenB - j - 1 >= 0;
trans l3 -> l2 update j := j + 1, cost := cost + 1;
trans lout -> lout;
