//! C interface to the nslb simulation library.
//!
//! Every function returns an [`NslbStatus`]; on failure the message is
//! available from [`nslb_last_error`] on the same thread. Handles are opaque
//! and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nslb::agents::{Agent, Mts};
use nslb::domain::{ActionId, Context, MeanRewardModel, RoundRecord, RunTrace, StateId, TransitionMatrix};
use nslb::envs::Environment;
use nslb::inference::{filter_update, BeliefVector};
use nslb::metrics::{argmax_tiebreak, cumulative_regret, segment_count};
use nslb::runner::{build_agent, emit_results, env_streams, run_experiment, stream_rng, AggregateResult, ExperimentConfig, PreparedEnv};
use nslb::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NslbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    Numeric = 4,
    InstanceTooLarge = 5,
    Protocol = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> NslbStatus {
    let status = match &e {
        Error::InvalidInput(_) => NslbStatus::InvalidInput,
        Error::Config(_) => NslbStatus::Config,
        Error::Numeric(_) => NslbStatus::Numeric,
        Error::InstanceTooLarge(_) => NslbStatus::InstanceTooLarge,
        Error::Protocol(_) => NslbStatus::Protocol,
        Error::Parse { .. } => NslbStatus::Parse,
        Error::Io { .. } => NslbStatus::Io,
    };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> Result<(), NslbStatus>) -> NslbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NslbStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            NslbStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), NslbStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(NslbStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or point to `len` readable values.
unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], NslbStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, what)?;
    Ok(slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or point to `len` writable values.
unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], NslbStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    non_null(p, what)?;
    Ok(slice::from_raw_parts_mut(p, len))
}

/// # Safety
/// `p` must be null or a nul-terminated string.
unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, NslbStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        NslbStatus::InvalidInput
    })
}

fn square(values: &[f64], n: usize) -> Vec<Vec<f64>> {
    values.chunks(n).map(<[f64]>::to_vec).collect()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nslb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// One filtering step over `n` states. `transition` is row-major `n x n`.
/// Writes the next-state belief to `out_belief` and the predictive
/// likelihood to `out_evidence`.
///
/// # Safety
/// Array arguments must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn nslb_filter_update(
    n: usize,
    belief: *const f64,
    transition: *const f64,
    likelihoods: *const f64,
    out_belief: *mut f64,
    out_evidence: *mut f64,
) -> NslbStatus {
    guard(|| {
        let b = input(belief, n, "belief")?;
        let phi = input(transition, n * n, "transition")?;
        let lik = input(likelihoods, n, "likelihoods")?;
        let out = output(out_belief, n, "out_belief")?;
        non_null(out_evidence, "out_evidence")?;
        let b = BeliefVector::new(b.to_vec()).map_err(fail)?;
        let phi = TransitionMatrix::new(square(phi, n)).map_err(fail)?;
        let step = filter_update(&b, &phi, lik).map_err(fail)?;
        out.copy_from_slice(step.belief.probs());
        *out_evidence = step.evidence;
        Ok(())
    })
}

/// Cumulative regret of a run given the optimal and chosen mean reward of
/// each round.
///
/// # Safety
/// All arrays must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn nslb_cumulative_regret(
    len: usize,
    optimal: *const f64,
    chosen: *const f64,
    out: *mut f64,
) -> NslbStatus {
    guard(|| {
        let opt = input(optimal, len, "optimal")?;
        let ch = input(chosen, len, "chosen")?;
        let out = output(out, len, "out")?;
        let mut trace = RunTrace::new("external", "external", 0);
        trace.records = opt
            .iter()
            .zip(ch)
            .enumerate()
            .map(|(t, (&o, &c))| RoundRecord {
                t: t + 1,
                context: Context::empty(1),
                action: ActionId(0),
                reward: c,
                true_state: StateId(0),
                optimal_action: ActionId(0),
                optimal_mean: o,
                chosen_mean: c,
            })
            .collect();
        out.copy_from_slice(&cumulative_regret(&trace));
        Ok(())
    })
}

/// Number of stationary segments in a latent state sequence.
///
/// # Safety
/// `states` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn nslb_segment_count(len: usize, states: *const usize, out: *mut usize) -> NslbStatus {
    guard(|| {
        let s = input(states, len, "states")?;
        non_null(out, "out")?;
        let ids: Vec<StateId> = s.iter().map(|&x| StateId(x)).collect();
        *out = segment_count(&ids);
        Ok(())
    })
}

/// A parsed experiment configuration.
pub struct NslbExperiment {
    config: ExperimentConfig,
}

/// Aggregated results of a finished experiment.
pub struct NslbResult {
    result: AggregateResult,
    config: ExperimentConfig,
    names: Vec<CString>,
}

/// Parses and validates a TOML experiment description. Relative paths in
/// the description resolve against the working directory.
///
/// # Safety
/// `toml` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nslb_experiment_from_toml(toml: *const c_char, out: *mut *mut NslbExperiment) -> NslbStatus {
    guard(|| {
        let text = string(toml, "toml")?;
        non_null(out, "out")?;
        let config = ExperimentConfig::from_toml(text).map_err(fail)?;
        config.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(NslbExperiment { config }));
        Ok(())
    })
}

/// Loads an experiment from a file; relative paths resolve against the
/// file's directory.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nslb_experiment_load(path: *const c_char, out: *mut *mut NslbExperiment) -> NslbStatus {
    guard(|| {
        let path = string(path, "path")?;
        non_null(out, "out")?;
        let config = ExperimentConfig::load(Path::new(path)).map_err(fail)?;
        config.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(NslbExperiment { config }));
        Ok(())
    })
}

/// Overrides the number of runs, horizon and seed. Zero leaves runs or
/// horizon unchanged.
///
/// # Safety
/// `exp` must be a live experiment handle.
#[no_mangle]
pub unsafe extern "C" fn nslb_experiment_set(exp: *mut NslbExperiment, runs: usize, horizon: usize, seed: u64) -> NslbStatus {
    guard(|| {
        non_null(exp, "experiment")?;
        let e = &mut *exp;
        let c = &mut e.config;
        if runs > 0 {
            c.runs = runs;
        }
        if horizon > 0 {
            c.horizon = horizon;
        }
        c.seed = seed;
        c.validate().map_err(fail)
    })
}

/// # Safety
/// `exp` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn nslb_experiment_free(exp: *mut NslbExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Runs every agent in every replication.
///
/// # Safety
/// `exp` must be a live experiment handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nslb_experiment_run(exp: *const NslbExperiment, out: *mut *mut NslbResult) -> NslbStatus {
    guard(|| {
        non_null(exp, "experiment")?;
        non_null(out, "out")?;
        let e = &*exp;
        let config = e.config.clone();
        let result = run_experiment(&config).map_err(fail)?;
        let names = result
            .agents
            .iter()
            .map(|a| CString::new(a.name.clone()).expect("agent names have no nul"))
            .collect();
        *out = Box::into_raw(Box::new(NslbResult { result, config, names }));
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn nslb_result_free(res: *mut NslbResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn nslb_result_num_agents(res: *const NslbResult) -> usize {
    if res.is_null() {
        0
    } else {
        let r = &*res;
        r.result.agents.len()
    }
}

/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn nslb_result_horizon(res: *const NslbResult) -> usize {
    if res.is_null() {
        0
    } else {
        let r = &*res;
        r.result.horizon
    }
}

/// Label of agent `i`, owned by the result handle.
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn nslb_result_agent_name(res: *const NslbResult, i: usize) -> *const c_char {
    if res.is_null() {
        return ptr::null();
    }
    let r = &*res;
    r.names.get(i).map_or(ptr::null(), |c| c.as_ptr())
}

fn agent_index(res: &NslbResult, i: usize) -> Result<(), NslbStatus> {
    if i < res.result.agents.len() {
        Ok(())
    } else {
        set_error(format!("agent index {i} out of range"));
        Err(NslbStatus::InvalidInput)
    }
}

/// Final metric mean and standard error of agent `i`.
///
/// # Safety
/// `res` must be a live result handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn nslb_result_final(res: *const NslbResult, i: usize, mean: *mut f64, stderr: *mut f64) -> NslbStatus {
    guard(|| {
        non_null(res, "result")?;
        non_null(mean, "mean")?;
        non_null(stderr, "stderr")?;
        let r = &*res;
        agent_index(r, i)?;
        *mean = r.result.agents[i].final_mean;
        *stderr = r.result.agents[i].final_stderr;
        Ok(())
    })
}

/// Per-round mean and standard error of agent `i`; both buffers need
/// `horizon` elements.
///
/// # Safety
/// `res` must be a live result handle; buffers must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn nslb_result_curve(
    res: *const NslbResult,
    i: usize,
    len: usize,
    mean: *mut f64,
    stderr: *mut f64,
) -> NslbStatus {
    guard(|| {
        non_null(res, "result")?;
        let r = &*res;
        agent_index(r, i)?;
        let a = &r.result.agents[i];
        if len != a.mean.len() {
            set_error(format!("buffer length {len} != horizon {}", a.mean.len()));
            return Err(NslbStatus::InvalidInput);
        }
        output(mean, len, "mean")?.copy_from_slice(&a.mean);
        output(stderr, len, "stderr")?.copy_from_slice(&a.stderr);
        Ok(())
    })
}

/// Writes `curves.csv`, `summary.csv` and `config_echo.toml` into `dir`.
///
/// # Safety
/// `res` must be a live result handle; `dir` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nslb_result_write(res: *const NslbResult, dir: *const c_char) -> NslbStatus {
    guard(|| {
        non_null(res, "result")?;
        let dir = string(dir, "dir")?;
        let r = &*res;
        emit_results(&r.result, &r.config, Path::new(dir)).map_err(fail)
    })
}

/// One agent acting in one replication of an experiment, stepped from C.
pub struct NslbSession {
    env: Box<dyn Environment>,
    agent: Box<dyn Agent>,
    t: usize,
}

/// Outcome of one round.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NslbRound {
    pub action: usize,
    pub reward: f64,
    pub state: usize,
    pub regret: f64,
}

/// Builds agent `agent` of `exp` against the environment of replication
/// `run`, with the same random streams the batch runner uses.
///
/// # Safety
/// `exp` must be a live experiment handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nslb_session_new(
    exp: *const NslbExperiment,
    run: u64,
    agent: usize,
    out: *mut *mut NslbSession,
) -> NslbStatus {
    guard(|| {
        non_null(exp, "experiment")?;
        non_null(out, "out")?;
        let e = &*exp;
        let c = &e.config;
        let Some(spec) = c.agents.get(agent) else {
            set_error(format!("agent index {agent} out of range"));
            return Err(NslbStatus::InvalidInput);
        };
        let prepared = PreparedEnv::prepare(&c.env).map_err(fail)?;
        let env = prepared.instantiate(env_streams(c.seed, run)).map_err(fail)?;
        let rng = stream_rng(c.seed, run, "agent", agent as u64);
        let agent = build_agent(spec, env.as_ref(), c.horizon, rng).map_err(fail)?;
        *out = Box::into_raw(Box::new(NslbSession { env, agent, t: 0 }));
        Ok(())
    })
}

/// Plays one round.
///
/// # Safety
/// `s` must be a live session handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nslb_session_step(s: *mut NslbSession, out: *mut NslbRound) -> NslbStatus {
    guard(|| {
        non_null(s, "session")?;
        non_null(out, "out")?;
        let s = &mut *s;
        s.t += 1;
        let ctx = s.env.begin_round(s.t);
        let means: Vec<f64> = (0..s.env.num_arms()).map(|a| s.env.mean_reward(ActionId(a))).collect();
        let best = argmax_tiebreak(&means).map_err(fail)?;
        s.agent.observe_truth(&means);
        let a = s.agent.act(&ctx).map_err(fail)?;
        if a.0 >= means.len() {
            return Err(fail(Error::Protocol(format!("agent chose arm {a} of {}", means.len()))));
        }
        let reward = s.env.pull(a);
        s.agent.update(&ctx, a, reward).map_err(fail)?;
        *out = NslbRound {
            action: a.0,
            reward,
            state: s.env.state().0,
            regret: means[best] - means[a.0],
        };
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn nslb_session_free(s: *mut NslbSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// A stand-alone agent driven by an external environment.
pub struct NslbAgent {
    agent: Box<dyn Agent>,
    arms: usize,
}

/// mTS over a known tabular model. `means` is row-major `arms x states`,
/// `transition` row-major `states x states`; the initial belief is uniform.
///
/// # Safety
/// Arrays must hold the stated number of elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nslb_mts_new(
    arms: usize,
    states: usize,
    means: *const f64,
    transition: *const f64,
    noise_std: f64,
    seed: u64,
    out: *mut *mut NslbAgent,
) -> NslbStatus {
    guard(|| {
        let m = input(means, arms * states, "means")?;
        let phi = input(transition, states * states, "transition")?;
        non_null(out, "out")?;
        let model = MeanRewardModel::tabular(arms, states, m.to_vec()).map_err(fail)?;
        let phi = TransitionMatrix::new(square(phi, states)).map_err(fail)?;
        let agent = Mts::new(
            model,
            phi,
            noise_std,
            BeliefVector::uniform(states),
            ChaCha8Rng::seed_from_u64(seed),
        )
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(NslbAgent {
            agent: Box::new(agent),
            arms,
        }));
        Ok(())
    })
}

/// # Safety
/// `a` must be a live agent handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nslb_agent_act(a: *mut NslbAgent, out: *mut usize) -> NslbStatus {
    guard(|| {
        non_null(a, "agent")?;
        non_null(out, "out")?;
        let a = &mut *a;
        *out = a.agent.act(&Context::empty(a.arms)).map_err(fail)?.0;
        Ok(())
    })
}

/// # Safety
/// `a` must be a live agent handle.
#[no_mangle]
pub unsafe extern "C" fn nslb_agent_update(a: *mut NslbAgent, action: usize, reward: f64) -> NslbStatus {
    guard(|| {
        non_null(a, "agent")?;
        let a = &mut *a;
        a.agent.update(&Context::empty(a.arms), ActionId(action), reward).map_err(fail)
    })
}

/// # Safety
/// `a` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn nslb_agent_free(a: *mut NslbAgent) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(nslb_last_error()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn filter_step_through_c_abi() {
        let b = [0.5, 0.5];
        let phi = [0.9, 0.1, 0.2, 0.8];
        let lik = [1.0, 3.0];
        let mut out = [0.0; 2];
        let mut ev = 0.0;
        let s = unsafe { nslb_filter_update(2, b.as_ptr(), phi.as_ptr(), lik.as_ptr(), out.as_mut_ptr(), &mut ev) };
        assert_eq!(s, NslbStatus::Ok);
        assert!((ev - 2.0).abs() < 1e-15);
        // (0.5*0.9 + 1.5*0.2, 0.5*0.1 + 1.5*0.8) / 2
        assert!((out[0] - 0.375).abs() < 1e-15);
        assert!((out[1] - 0.625).abs() < 1e-15);
    }

    #[test]
    fn bad_inputs_set_status_and_message() {
        let b = [0.5, 0.6];
        let phi = [1.0, 0.0, 0.0, 1.0];
        let mut out = [0.0; 2];
        let mut ev = 0.0;
        let s = unsafe { nslb_filter_update(2, b.as_ptr(), phi.as_ptr(), b.as_ptr(), out.as_mut_ptr(), &mut ev) };
        assert_eq!(s, NslbStatus::InvalidInput);
        assert!(!last_error().is_empty());
        let s = unsafe { nslb_filter_update(2, ptr::null(), phi.as_ptr(), b.as_ptr(), out.as_mut_ptr(), &mut ev) };
        assert_eq!(s, NslbStatus::NullPointer);
        assert!(last_error().contains("belief"));
    }

    #[test]
    fn regret_and_segments() {
        let opt = [1.0, 1.0, 2.0];
        let ch = [1.0, 0.5, 1.0];
        let mut out = [0.0; 3];
        assert_eq!(
            unsafe { nslb_cumulative_regret(3, opt.as_ptr(), ch.as_ptr(), out.as_mut_ptr()) },
            NslbStatus::Ok
        );
        assert_eq!(out, [0.0, 0.5, 1.5]);
        let states = [0usize, 0, 1, 1, 0];
        let mut n = 0;
        assert_eq!(unsafe { nslb_segment_count(5, states.as_ptr(), &mut n) }, NslbStatus::Ok);
        assert_eq!(n, 3);
    }

    const CONFIG: &str = "horizon = 20\nruns = 3\nseed = 5\n[env]\nkind = \"synthetic\"\narms = 3\nstates = 2\nsigma = 0.5\nschedule = { kind = \"fixed_period\", period = 5 }\nrewards = { kind = \"uniform\" }\n[[agents]]\nkind = \"oracle\"\n[[agents]]\nkind = \"mts\"\n\0";

    #[test]
    fn experiment_and_session_handles() {
        unsafe {
            let mut exp = ptr::null_mut();
            assert_eq!(nslb_experiment_from_toml(CONFIG.as_ptr().cast(), &mut exp), NslbStatus::Ok);
            let mut res = ptr::null_mut();
            assert_eq!(nslb_experiment_run(exp, &mut res), NslbStatus::Ok);
            assert_eq!(nslb_result_num_agents(res), 2);
            assert_eq!(CStr::from_ptr(nslb_result_agent_name(res, 1)).to_str().unwrap(), "mts");
            let (mut m, mut se) = (f64::NAN, f64::NAN);
            assert_eq!(nslb_result_final(res, 0, &mut m, &mut se), NslbStatus::Ok);
            assert_eq!((m, se), (0.0, 0.0));
            let mut curve = vec![0.0; 20];
            let mut errs = vec![0.0; 20];
            assert_eq!(nslb_result_curve(res, 1, 20, curve.as_mut_ptr(), errs.as_mut_ptr()), NslbStatus::Ok);
            assert_eq!(nslb_result_final(res, 7, &mut m, &mut se), NslbStatus::InvalidInput);

            // Stepping each run by hand reproduces the batch run's regret.
            let mut total = 0.0;
            for run in 0..3 {
                let mut s = ptr::null_mut();
                assert_eq!(nslb_session_new(exp, run, 1, &mut s), NslbStatus::Ok);
                let mut round = NslbRound::default();
                let mut regret = 0.0;
                for _ in 0..20 {
                    assert_eq!(nslb_session_step(s, &mut round), NslbStatus::Ok);
                    regret += round.regret;
                }
                total += regret;
                nslb_session_free(s);
            }
            assert!((total / 3.0 - curve[19]).abs() < 1e-9);

            let dir = std::env::temp_dir().join(format!("nslb-ffi-{}", std::process::id()));
            let cdir = CString::new(dir.to_str().unwrap()).unwrap();
            assert_eq!(nslb_result_write(res, cdir.as_ptr()), NslbStatus::Ok);
            assert!(dir.join("curves.csv").is_file());
            std::fs::remove_dir_all(&dir).unwrap();

            nslb_result_free(res);
            nslb_experiment_free(exp);
        }
    }

    #[test]
    fn config_errors_map_to_status() {
        let bad = "horizon = 0\n\0";
        let mut exp = ptr::null_mut();
        let s = unsafe { nslb_experiment_from_toml(bad.as_ptr().cast(), &mut exp) };
        assert_eq!(s, NslbStatus::Config);
        assert!(exp.is_null());
    }

    #[test]
    fn standalone_mts_agent() {
        // One state: mTS must always pick the best arm.
        let means = [0.1, 0.9, 0.5];
        let phi = [1.0];
        let mut agent = ptr::null_mut();
        unsafe {
            assert_eq!(nslb_mts_new(3, 1, means.as_ptr(), phi.as_ptr(), 0.5, 1, &mut agent), NslbStatus::Ok);
            for _ in 0..10 {
                let mut a = 99;
                assert_eq!(nslb_agent_act(agent, &mut a), NslbStatus::Ok);
                assert_eq!(a, 1);
                assert_eq!(nslb_agent_update(agent, a, 0.8), NslbStatus::Ok);
            }
            assert_eq!(nslb_agent_update(agent, 0, 0.8), NslbStatus::Protocol);
            nslb_agent_free(agent);
        }
    }
}
