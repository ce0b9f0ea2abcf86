//! HTTP service for playing hold'em against trained agents.
//!
//! | route | purpose |
//! |---|---|
//! | `GET /api/agents` | loaded checkpoints |
//! | `POST /api/sessions` | start a game |
//! | `GET /api/sessions/{id}` | current view |
//! | `POST /api/sessions/{id}/actions` | play an action |
//!
//! Every view is built from the human seat's perspective. The opponent's
//! hole cards appear only inside results of hands that reached showdown.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gpfsp::arena::{NetworkPlayer, Player};
use gpfsp::engine::{mbb_per_hand, new_game, Action, ActionKind, GameConfig, GameState, HandResult, NUM_PLAYERS};
use gpfsp::neural::{load_checkpoint, Checkpoint};
use gpfsp::trainer::{config_from_checkpoint, GameKind};
use gpfsp::{Card, Error as CoreError};
use rand::Rng;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

pub const DEFAULT_IDLE_EXPIRY: Duration = Duration::from_secs(30 * 60);

/// A loaded checkpoint, shared read-only by every session that uses it.
#[derive(Clone)]
pub struct AgentEntry {
    pub id: String,
    pub player: NetworkPlayer,
    pub config: GameConfig,
    pub episode: Option<String>,
}

impl AgentEntry {
    pub fn from_checkpoint(id: impl Into<String>, ckpt: &Checkpoint) -> gpfsp::Result<Self> {
        let id = id.into();
        let config = config_from_checkpoint(ckpt)?;
        if config.game != GameKind::Holdem {
            return Err(CoreError::InvalidInput(format!("checkpoint {id} is not a hold'em agent")));
        }
        Ok(AgentEntry {
            player: NetworkPlayer::from_checkpoint(ckpt, 1, id.clone())?,
            config: config.game_config,
            episode: ckpt.meta("episode").map(str::to_string),
            id,
        })
    }

    /// Loads `path`, naming the agent after the file stem.
    pub fn load(path: &Path) -> gpfsp::Result<Self> {
        let ckpt = load_checkpoint(path)?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "agent".into());
        Self::from_checkpoint(id, &ckpt)
    }
}

struct Session {
    state: GameState,
    agent: NetworkPlayer,
    human: usize,
    version: u64,
    last_active: Instant,
}

#[derive(Clone)]
pub struct AppState {
    agents: Arc<Vec<AgentEntry>>,
    sessions: Arc<std::sync::Mutex<HashMap<String, Arc<Mutex<Session>>>>>,
    idle_expiry: Duration,
}

impl AppState {
    pub fn new(agents: Vec<AgentEntry>, idle_expiry: Duration) -> Self {
        AppState {
            agents: Arc::new(agents),
            sessions: Arc::default(),
            idle_expiry,
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("unknown_session", format!("no session {id}")))
    }

    /// Drops sessions idle for longer than the expiry; returns how many.
    pub async fn expire_idle(&self) -> usize {
        let entries: Vec<(String, Arc<Mutex<Session>>)> = {
            let table = self.sessions.lock().expect("session table poisoned");
            table.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
        };
        let mut stale = Vec::new();
        for (id, s) in entries {
            if let Ok(s) = s.try_lock() {
                if s.last_active.elapsed() > self.idle_expiry {
                    stale.push(id);
                }
            }
        }
        let mut table = self.sessions.lock().expect("session table poisoned");
        for id in &stale {
            table.remove(id);
        }
        stale.len()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session table poisoned").len()
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub legal_actions: Option<Vec<LegalAction>>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code,
                message: message.into(),
                legal_actions: None,
            },
        }
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    fn conflict(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, message)
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn internal(e: CoreError) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalAction {
    pub kind: ActionKind,
    pub chips: u32,
}

impl From<Action> for LegalAction {
    fn from(a: Action) -> Self {
        LegalAction {
            kind: a.kind,
            chips: a.chips,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryItem {
    pub hand: u32,
    pub street: String,
    /// `"you"` or `"agent"`.
    pub actor: String,
    pub kind: ActionKind,
    pub chips: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandSummary {
    pub hand: u32,
    /// Chip change of the human, then of the agent.
    pub your_delta: i64,
    pub agent_delta: i64,
    pub showdown: bool,
    pub board: Vec<Card>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub your_hole: Option<[Card; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent_hole: Option<[Card; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winning_class: Option<u16>,
}

/// Everything the human may see.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublicStateView {
    pub session_id: String,
    pub version: u64,
    pub agent: String,
    pub your_seat: usize,
    pub hand: u32,
    pub street: String,
    pub board: Vec<Card>,
    pub your_hole: [Card; 2],
    pub pot: u32,
    pub your_stack: u32,
    pub agent_stack: u32,
    pub your_bet: u32,
    pub agent_bet: u32,
    pub you_are_button: bool,
    pub your_turn: bool,
    pub legal_actions: Vec<LegalAction>,
    pub history: Vec<HistoryItem>,
    pub last_hand: Option<HandSummary>,
    pub hands_played: usize,
    pub your_total_delta: i64,
    pub your_mbb_per_hand: Option<f64>,
    pub game_over: bool,
}

fn summarize(r: &HandResult, human: usize) -> HandSummary {
    let revealed = r.revealed.filter(|_| r.showdown);
    HandSummary {
        hand: r.hand,
        your_delta: r.chip_delta[human],
        agent_delta: r.chip_delta[1 - human],
        showdown: r.showdown,
        board: r.board.clone(),
        your_hole: revealed.map(|h| h[human]),
        agent_hole: revealed.map(|h| h[1 - human]),
        winning_class: r.winning_class.map(|c| c.value()),
    }
}

fn view(id: &str, agent: &str, s: &Session) -> PublicStateView {
    let st = &s.state;
    let h = s.human;
    let over = st.is_game_over();
    let your_turn = !over && st.to_act() == h;
    let total: i64 = st.results().iter().map(|r| r.chip_delta[h]).sum();
    let hands = st.results().len();
    let history = st
        .history()
        .iter()
        .filter(|e| e.hand == st.hand_index())
        .map(|e| HistoryItem {
            hand: e.hand,
            street: e.street.name().to_string(),
            actor: if e.player == h { "you" } else { "agent" }.to_string(),
            kind: e.action.kind,
            chips: e.action.chips,
        })
        .collect();
    PublicStateView {
        session_id: id.to_string(),
        version: s.version,
        agent: agent.to_string(),
        your_seat: h,
        hand: st.hand_index(),
        street: st.street().name().to_string(),
        board: st.board().to_vec(),
        your_hole: st.hole(h),
        pot: st.pot_total(),
        your_stack: st.stacks()[h],
        agent_stack: st.stacks()[1 - h],
        your_bet: st.bets()[h],
        agent_bet: st.bets()[1 - h],
        you_are_button: st.button() == h,
        your_turn,
        legal_actions: if your_turn {
            st.legal_actions().unwrap_or_default().into_iter().map(Into::into).collect()
        } else {
            Vec::new()
        },
        history,
        last_hand: st.results().last().map(|r| summarize(r, h)),
        hands_played: hands,
        your_total_delta: total,
        your_mbb_per_hand: mbb_per_hand(total, hands as u64, st.config().big_blind()).ok(),
        game_over: over,
    }
}

/// Lets the agent act until the human is to act or the game ends.
fn run_agent(s: &mut Session) -> Result<(), ApiError> {
    while !s.state.is_game_over() && s.state.to_act() != s.human {
        let seat = s.state.to_act();
        let kind = s.agent.act(&s.state, seat).map_err(ApiError::internal)?;
        let action = s.state.resolve(kind).map_err(ApiError::internal)?;
        tracing::debug!(hand = s.state.hand_index(), action = %action.kind, chips = action.chips, "agent acted");
        s.state.apply_in_place(kind).map_err(ApiError::internal)?;
    }
    Ok(())
}

#[derive(Debug, Default, Deserialize, Serialize)]
pub struct ConfigOverrides {
    pub starting_stack: Option<u32>,
    pub small_blind: Option<u32>,
    pub max_hands_per_game: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
pub struct CreateSession {
    /// Agent id from `/api/agents`; the first agent when absent.
    pub agent: Option<String>,
    #[serde(default)]
    pub human_seat: usize,
    #[serde(default)]
    pub config: ConfigOverrides,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub state: PublicStateView,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct PostAction {
    pub action: String,
    /// Rejects the action with 409 unless the session is at this version.
    pub expected_version: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AgentInfo {
    pub id: String,
    pub network: String,
    pub episode: Option<String>,
    pub starting_stack: u32,
    pub small_blind: u32,
    pub max_hands_per_game: u32,
}

async fn list_agents(State(app): State<AppState>) -> Json<Vec<AgentInfo>> {
    Json(
        app.agents
            .iter()
            .map(|a| AgentInfo {
                id: a.id.clone(),
                network: a.player.network().spec().to_string(),
                episode: a.episode.clone(),
                starting_stack: a.config.starting_stack,
                small_blind: a.config.small_blind,
                max_hands_per_game: a.config.max_hands_per_game,
            })
            .collect(),
    )
}

async fn create_session(State(app): State<AppState>, Json(req): Json<CreateSession>) -> Result<Json<Created>, ApiError> {
    let entry = match &req.agent {
        Some(id) => app.agents.iter().find(|a| &a.id == id),
        None => app.agents.first(),
    }
    .ok_or_else(|| ApiError::not_found("unknown_agent", format!("no agent {:?}", req.agent.as_deref().unwrap_or(""))))?;
    if req.human_seat >= NUM_PLAYERS {
        return Err(ApiError::bad_request("invalid_config", "human_seat must be 0 or 1"));
    }
    let o = &req.config;
    let config = GameConfig {
        starting_stack: o.starting_stack.unwrap_or(entry.config.starting_stack),
        small_blind: o.small_blind.unwrap_or(entry.config.small_blind),
        max_hands_per_game: o.max_hands_per_game.unwrap_or(entry.config.max_hands_per_game),
        seed: o.seed.unwrap_or_else(|| rand::rng().random()),
        allow_free_fold: entry.config.allow_free_fold,
    };
    let state = new_game(config.clone()).map_err(|e| ApiError::bad_request("invalid_config", e.to_string()))?;
    let mut agent = entry.player.clone();
    agent.reset(config.seed ^ 0xA6E7);
    let mut session = Session {
        state,
        agent,
        human: req.human_seat,
        version: 0,
        last_active: Instant::now(),
    };
    run_agent(&mut session)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let state = view(&id, &entry.id, &session);
    app.sessions
        .lock()
        .expect("session table poisoned")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    tracing::info!(session = %id, agent = %entry.id, "session created");
    Ok(Json(Created { session_id: id, state }))
}

fn agent_name(s: &Session) -> String {
    s.agent.name()
}

async fn get_session(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<PublicStateView>, ApiError> {
    let session = app.session(&id)?;
    let s = session.lock().await;
    Ok(Json(view(&id, &agent_name(&s), &s)))
}

async fn post_action(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<PostAction>,
) -> Result<Json<PublicStateView>, ApiError> {
    let session = app.session(&id)?;
    // One action in flight per session; a concurrent post is a conflict.
    let mut s = session
        .try_lock()
        .map_err(|_| ApiError::conflict("busy", "another action is being applied"))?;
    if let Some(v) = req.expected_version {
        if v != s.version {
            return Err(ApiError::conflict("stale_version", format!("session is at version {}", s.version)));
        }
    }
    if s.state.is_game_over() {
        return Err(ApiError::conflict("game_over", "the game is over"));
    }
    if s.state.to_act() != s.human {
        return Err(ApiError::conflict("not_your_turn", "the agent is to act"));
    }
    let legal: Vec<LegalAction> = s
        .state
        .legal_actions()
        .map_err(ApiError::internal)?
        .into_iter()
        .map(Into::into)
        .collect();
    let kind = ActionKind::parse(&req.action).ok().filter(|k| legal.iter().any(|a| a.kind == *k));
    let Some(kind) = kind else {
        let mut err = ApiError::bad_request("illegal_action", format!("{} is not legal here", req.action));
        err.body.legal_actions = Some(legal);
        return Err(err);
    };
    let mut next = s.state.clone();
    next.apply_in_place(kind).map_err(ApiError::internal)?;
    tracing::debug!(session = %id, hand = s.state.hand_index(), action = %kind, "human acted");
    s.state = next;
    run_agent(&mut s)?;
    s.version += 1;
    s.last_active = Instant::now();
    Ok(Json(view(&id, &agent_name(&s), &s)))
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/api/agents", get(list_agents))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/actions", post(post_action))
        .with_state(app)
}

/// Serves until interrupted, sweeping idle sessions once a minute.
pub async fn serve(app: AppState, addr: &str) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    let sweeper = app.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let n = sweeper.expire_idle().await;
            if n > 0 {
                tracing::info!(expired = n, "idle sessions dropped");
            }
        }
    });
    axum::serve(listener, router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
