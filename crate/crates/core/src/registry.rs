//! Name-keyed registry of inner solvers and cancellation strategies.

use crate::cancel::{CancelError, CancelStrategy, ExhaustiveSearch, OptimizeReport, SingletonScreening};
use crate::problem::Problem;
use crate::solve::{ChainPropagation, DelaySolver, SimplexReference};
use std::collections::BTreeMap;
use std::sync::Arc;

pub const DEFAULT_SOLVER: &str = "propagate";
pub const DEFAULT_STRATEGY: &str = "singleton";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown {kind} `{name}` (available: {})", available.join(", "))]
    Unknown {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },
}

#[derive(Clone, Default)]
pub struct Registry {
    solvers: BTreeMap<&'static str, Arc<dyn DelaySolver>>,
    strategies: BTreeMap<&'static str, Arc<dyn CancelStrategy>>,
}

impl Registry {
    /// Registry holding `propagate`, `simplex`, `singleton` and `exhaustive`.
    pub fn builtin() -> Self {
        let mut r = Registry::default();
        r.register_solver(Arc::new(ChainPropagation));
        r.register_solver(Arc::new(SimplexReference));
        r.register_strategy(Arc::new(SingletonScreening));
        r.register_strategy(Arc::new(ExhaustiveSearch));
        r
    }

    /// Later registrations under the same name replace earlier ones.
    pub fn register_solver(&mut self, solver: Arc<dyn DelaySolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn register_strategy(&mut self, strategy: Arc<dyn CancelStrategy>) {
        self.strategies.insert(strategy.name(), strategy);
    }

    pub fn solver(&self, name: &str) -> Result<Arc<dyn DelaySolver>, RegistryError> {
        self.solvers.get(name).cloned().ok_or_else(|| RegistryError::Unknown {
            kind: "solver",
            name: name.to_string(),
            available: self.solver_names().map(String::from).collect(),
        })
    }

    pub fn strategy(&self, name: &str) -> Result<Arc<dyn CancelStrategy>, RegistryError> {
        self.strategies.get(name).cloned().ok_or_else(|| RegistryError::Unknown {
            kind: "strategy",
            name: name.to_string(),
            available: self.strategy_names().map(String::from).collect(),
        })
    }

    pub fn solver_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.solvers.keys().copied()
    }

    pub fn strategy_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.strategies.keys().copied()
    }

    pub fn solvers(&self) -> impl Iterator<Item = &Arc<dyn DelaySolver>> {
        self.solvers.values()
    }

    pub fn strategies(&self) -> impl Iterator<Item = &Arc<dyn CancelStrategy>> {
        self.strategies.values()
    }

    pub fn engine(&self, solver: &str, strategy: &str) -> Result<Engine, RegistryError> {
        Ok(Engine {
            solver: self.solver(solver)?,
            strategy: self.strategy(strategy)?,
        })
    }
}

/// A selected solver and strategy pair.
#[derive(Clone)]
pub struct Engine {
    pub solver: Arc<dyn DelaySolver>,
    pub strategy: Arc<dyn CancelStrategy>,
}

impl Default for Engine {
    fn default() -> Self {
        Engine {
            solver: Arc::new(ChainPropagation),
            strategy: Arc::new(SingletonScreening),
        }
    }
}

impl Engine {
    pub fn run(&self, problem: &Problem) -> Result<OptimizeReport, CancelError> {
        self.strategy.run(problem, self.solver.as_ref())
    }
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("solver", &self.solver.name())
            .field("strategy", &self.strategy.name())
            .finish()
    }
}
