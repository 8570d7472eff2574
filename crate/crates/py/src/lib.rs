//! Python bindings.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use weighwright::composition::{self, PlanResult};
use weighwright::search::{self, SearchLimits, SearchOutcome, SearchProblem, Solver};
use weighwright::session::Session as CoreSession;
use weighwright::strategies::builtin;
use weighwright::{bounds, CoinId, DecisionTree, Error, FakeSet, Leaf, Semantics, StrategyTable};

create_exception!(weighwright, WeighwrightError, PyException);
create_exception!(weighwright, ContradictionError, WeighwrightError);
create_exception!(weighwright, BudgetExceededError, WeighwrightError);

fn err(e: Error) -> PyErr {
    match e {
        Error::Contradiction(_) => ContradictionError::new_err(e.to_string()),
        Error::BudgetExceeded { .. } => BudgetExceededError::new_err(e.to_string()),
        _ => WeighwrightError::new_err(e.to_string()),
    }
}

fn semantics(s: &str) -> PyResult<Semantics> {
    match s {
        "exact" => Ok(Semantics::Exact),
        "sort" => Ok(Semantics::Sort),
        _ => Err(PyValueError::new_err(format!("semantics must be 'exact' or 'sort', not {s:?}"))),
    }
}

fn to_py<'py, T: serde::Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| WeighwrightError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn fake_set(coins: Vec<u32>, universe: u32) -> PyResult<FakeSet> {
    let s = weighwright::encode_subset(coins.into_iter().map(CoinId)).map_err(err)?;
    if !s.fits(universe) {
        return Err(PyValueError::new_err(format!("coins outside 1..={universe}")));
    }
    Ok(s)
}

/// A decision tree over a fixed set of coins.
#[pyclass(module = "weighwright", frozen)]
struct Strategy {
    name: String,
    semantics: Semantics,
    tree: DecisionTree,
}

#[pymethods]
impl Strategy {
    /// One of the shipped 11-coin tables, repaired unless `repair` is false.
    #[staticmethod]
    #[pyo3(signature = (name, semantics = "sort", repair = true))]
    fn builtin(name: &str, semantics: &str, repair: bool) -> PyResult<Strategy> {
        let sem = self::semantics(semantics)?;
        let tree = if repair {
            builtin::repaired(name, sem)
        } else {
            builtin::raw_tree(name)
        }
        .map_err(err)?;
        Ok(Strategy {
            name: name.to_string(),
            semantics: sem,
            tree,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Strategy> {
        let table = StrategyTable::from_json(text).map_err(err)?;
        Ok(Strategy {
            tree: table.to_tree().map_err(err)?,
            name: table.name,
            semantics: table.semantics,
        })
    }

    fn to_json(&self) -> String {
        StrategyTable::from_tree(self.name.clone(), self.semantics, &self.tree).to_json()
    }

    fn to_dot(&self) -> String {
        self.tree.to_dot(&self.name)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.name
    }

    #[getter]
    fn universe(&self) -> u32 {
        self.tree.universe()
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.tree.depth()
    }

    #[getter]
    fn semantics(&self) -> String {
        self.semantics.to_string()
    }

    /// Checks every fake set; returns the report as a dict.
    fn verify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let report = py.detach(|| weighwright::verify_tree(&self.tree, self.semantics));
        to_py(py, &report)
    }

    /// Runs the strategy against the given heavy coins: `(outcome digits, answer)`,
    /// where the answer is a sorted list of coins or `None` for the single-weight case.
    fn run(&self, heavy: Vec<u32>) -> PyResult<(Vec<u8>, Option<Vec<u32>>)> {
        let run = self.tree.run(fake_set(heavy, self.tree.universe())?).map_err(err)?;
        let answer = match run.leaf {
            Leaf::Uniform => None,
            Leaf::Classified(s) => Some(s.coins().map(|c| c.0).collect()),
        };
        Ok((run.path.iter().map(|o| o.digit()).collect(), answer))
    }

    fn __repr__(&self) -> String {
        format!(
            "Strategy({:?}, {} coins, depth {}, {})",
            self.name,
            self.tree.universe(),
            self.tree.depth(),
            self.semantics
        )
    }
}

/// Searches for a strategy of at most `depth` weighings; `None` if none exists.
#[pyfunction]
#[pyo3(signature = (n, depth, semantics = "exact", uniform_by = None, max_nodes = None))]
fn solve(
    py: Python<'_>,
    n: u32,
    depth: u32,
    semantics: &str,
    uniform_by: Option<u32>,
    max_nodes: Option<u64>,
) -> PyResult<Option<Strategy>> {
    let sem = self::semantics(semantics)?;
    let mut problem = SearchProblem::for_semantics(n, depth, sem).map_err(err)?;
    if let Some(u) = uniform_by {
        problem = problem.uniform_by(u);
    }
    let mut limits = SearchLimits::default();
    if max_nodes.is_some() {
        limits.max_nodes = max_nodes;
    }
    let outcome = py.detach(|| Solver::new(limits).solve(&problem)).map_err(err)?;
    Ok(match outcome {
        SearchOutcome::Found(tree) => Some(Strategy {
            name: format!("search-{n}-{sem}-{depth}"),
            semantics: sem,
            tree,
        }),
        SearchOutcome::Infeasible => None,
    })
}

/// Fewest weighings for `n` coins with reference coins, searching up to `d_max`.
#[pyfunction]
#[pyo3(signature = (n, d_max = 8))]
fn g(py: Python<'_>, n: u32, d_max: u32) -> PyResult<Option<u32>> {
    py.detach(|| search::g_exact(n, d_max)).map_err(err)
}

/// Fewest weighings to sort `n` coins without reference coins.
#[pyfunction]
#[pyo3(signature = (n, d_max = 8, early_uniform = false))]
fn gbar(py: Python<'_>, n: u32, d_max: u32, early_uniform: bool) -> PyResult<Option<u32>> {
    py.detach(|| {
        if early_uniform {
            search::gbar_early_uniform(n, d_max)
        } else {
            search::gbar_exact(n, d_max)
        }
    })
    .map_err(err)
}

/// `(lower_g, lower_gbar, upper)` for `n` coins.
#[pyfunction]
fn bounds_for(n: u64) -> (u64, u64, u64) {
    (bounds::lower_g(n), bounds::lower_gbar(n), bounds::upper(n))
}

/// Extends an 11-coin strategy with three more coins.
#[pyfunction]
fn lemma2_extend(py: Python<'_>, strategy: &Strategy, coins: [u32; 3]) -> PyResult<Strategy> {
    let b = coins.map(CoinId);
    let tree = py
        .detach(|| composition::lemma2_extend(&strategy.tree, b, strategy.semantics))
        .map_err(err)?;
    Ok(Strategy {
        name: format!("{}+3", strategy.name),
        semantics: strategy.semantics,
        tree,
    })
}

/// The 22-coin strategy for eleven pairs, one heavy coin in each.
#[pyfunction]
fn paired_strategy() -> PyResult<Strategy> {
    Ok(Strategy {
        name: "pairs".into(),
        semantics: Semantics::Exact,
        tree: composition::corollary1_tree(&composition::standard_pairs()).map_err(err)?,
    })
}

/// A layout of strategies covering `n` coins.
#[pyclass(module = "weighwright", frozen)]
struct Plan {
    plan: Arc<composition::CompositePlan>,
}

#[pymethods]
impl Plan {
    #[new]
    #[pyo3(signature = (n, semantics = "exact"))]
    fn new(py: Python<'_>, n: u32, semantics: &str) -> PyResult<Plan> {
        let sem = self::semantics(semantics)?;
        let plan = py.detach(|| composition::plan(n, sem)).map_err(err)?;
        Ok(Plan { plan: Arc::new(plan) })
    }

    #[getter]
    fn total_weighings(&self) -> u32 {
        self.plan.total_weighings
    }

    #[getter]
    fn bound(&self) -> u32 {
        self.plan.bound
    }

    fn header(&self) -> String {
        self.plan.header()
    }

    fn describe(&self) -> String {
        self.plan.describe()
    }

    fn to_json(&self) -> String {
        self.plan.to_json()
    }

    /// Runs the plan against the given heavy coins: `(answer, weighings asked)`.
    fn run(&self, heavy: Vec<u32>) -> PyResult<(Option<Vec<u32>>, u32)> {
        let heavy = fake_set(heavy, self.plan.n)?;
        let (result, asked) = composition::run_plan(&self.plan, |c| heavy.contains(c)).map_err(err)?;
        Ok((plan_answer(&result), asked))
    }
}

fn plan_answer(r: &PlanResult) -> Option<Vec<u32>> {
    match r {
        PlanResult::Uniform => None,
        PlanResult::Fakes(c) => Some(c.iter().map(|c| c.0).collect()),
    }
}

/// An interactive run: ask for `next()`, weigh, `submit` the outcome.
#[pyclass(module = "weighwright")]
struct Session {
    inner: CoreSession,
}

#[pymethods]
impl Session {
    #[new]
    #[pyo3(signature = (n = None, strategy = None, semantics = "sort"))]
    fn new(n: Option<u32>, strategy: Option<&Strategy>, semantics: &str) -> PyResult<Session> {
        let sem = self::semantics(semantics)?;
        let inner = match (strategy, n) {
            (Some(s), _) => CoreSession::for_tree(s.tree.clone(), sem, &s.name),
            (None, Some(n)) => CoreSession::for_coins(n, sem),
            (None, None) => return Err(PyValueError::new_err("give n or strategy")),
        }
        .map_err(err)?;
        Ok(Session { inner })
    }

    /// The next weighing, or the result once finished.
    fn next<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.next())
    }

    /// Applies `<`, `=` or `>`. A contradictory outcome raises and changes nothing.
    fn submit<'py>(&mut self, py: Python<'py>, outcome: &str) -> PyResult<Bound<'py, PyAny>> {
        let next = self.inner.submit_symbol(outcome).map_err(err)?;
        to_py(py, &next)
    }

    fn state<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.state())
    }

    fn prompt(&self) -> String {
        self.inner.prompt()
    }

    #[getter]
    fn finished(&self) -> bool {
        self.inner.is_finished()
    }

    /// Heavy coins once finished; `None` for the single-weight case or while running.
    #[getter]
    fn result(&self) -> Option<Vec<u32>> {
        self.inner.result().and_then(plan_answer)
    }
}

#[pymodule(name = "weighwright")]
fn weighwright_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("WeighwrightError", py.get_type::<WeighwrightError>())?;
    m.add("ContradictionError", py.get_type::<ContradictionError>())?;
    m.add("BudgetExceededError", py.get_type::<BudgetExceededError>())?;
    m.add_class::<Strategy>()?;
    m.add_class::<Plan>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(g, m)?)?;
    m.add_function(wrap_pyfunction!(gbar, m)?)?;
    m.add_function(wrap_pyfunction!(bounds_for, m)?)?;
    m.add_function(wrap_pyfunction!(lemma2_extend, m)?)?;
    m.add_function(wrap_pyfunction!(paired_strategy, m)?)?;
    Ok(())
}
