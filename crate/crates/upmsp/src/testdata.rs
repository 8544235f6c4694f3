//! Shared fixtures for unit tests.

use crate::instance::Instance;

/// Canonical text of the 2-machine / 3-job fixture used across the test
/// suite. Its optimum makespan is 10 (machine 1 runs job 1; machine 2 runs
/// jobs 2 then 3).
pub const T1_TEXT: &str = "\
UPMSP v1
# name: t1
m 2 n 3
P
4 6
5 3
7 4
S 1
1 1 1
0 2 2
2 0 2
2 2 0
S 2
2 2 2
0 1 1
1 0 1
1 1 0
";

pub fn t1() -> Instance {
    Instance::new(
        2,
        3,
        vec![vec![4, 6], vec![5, 3], vec![7, 4]],
        vec![
            vec![vec![1, 1, 1], vec![0, 2, 2], vec![2, 0, 2], vec![2, 2, 0]],
            vec![vec![2, 2, 2], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]],
        ],
        "t1",
    )
    .expect("fixture is well-formed")
}
