"""
OPIMC Clustering Experiments - Streamlit Frontend

Launches one-pass incomplete multi-view clustering runs on a synthetic dataset or
a dataset manifest, shows per-pass NMI / AC / average loss, and lists stored runs
when a results database is configured.
"""

import os
import tempfile

import pandas as pd
import streamlit as st

import config
from backend import get_stored_runs, prepare_data, records_frame, run_experiment
from data import make_synthetic, save_dataset, simulate_missing
from data.loader import MultiViewDataset
from model.types import PresenceMask, SolverConfig

# Page configuration
st.set_page_config(
    page_title="OPIMC Clustering Experiments",
    page_icon="📊",
    layout="wide"
)

st.markdown("""
<style>
    .main .block-container {
        padding-top: 2rem;
        padding-bottom: 2rem;
    }

    div[data-testid="metric-container"] {
        background: linear-gradient(135deg, #667eea 0%, #764ba2 100%) !important;
        border-radius: 8px !important;
        padding: 0.4rem !important;
        color: white !important;
    }

    section[data-testid="stSidebar"] {
        background: linear-gradient(180deg, #f8f9fa 0%, #e9ecef 100%);
    }
</style>
""", unsafe_allow_html=True)

# Initialize session state
if "last_result" not in st.session_state:
    st.session_state.last_result = None

if "dataset_dir" not in st.session_state:
    st.session_state.dataset_dir = tempfile.mkdtemp(prefix="opimc_app_")

# Configurable table row limit
TABLE_ROW_LIMIT = int(os.environ.get("TABLE_ROW_LIMIT", "20"))


@st.cache_data(ttl=30)
def fetch_stored_runs():
    try:
        return get_stored_runs(limit=TABLE_ROW_LIMIT)
    except Exception as e:
        return {"runs": [], "error": str(e)}


st.markdown("""
<div style="
    background: linear-gradient(135deg, #667eea 0%, #764ba2 100%);
    padding: 0.75rem 1.5rem;
    border-radius: 10px;
    margin-bottom: 1rem;
    color: white;
    text-align: center;
">
    <h3 style="color: white !important; margin: 0; font-size: 1.2rem;">OPIMC Clustering Experiments</h3>
    <span style="font-size: 0.75rem; color: rgba(255,255,255,0.8);">One-pass incomplete multi-view clustering</span>
</div>
""", unsafe_allow_html=True)

with st.sidebar:
    st.markdown("**Solver**")
    alpha = st.number_input("alpha", min_value=0.0, value=float(config.DEFAULT_ALPHA), format="%g", key="alpha")
    chunk_size = st.number_input("Chunk size", min_value=1, value=int(config.DEFAULT_CHUNK_SIZE), step=1, key="chunk_size")
    passes = st.number_input("Passes", min_value=1, value=max(2, int(config.DEFAULT_PASSES)), step=1, key="passes")
    seed = st.number_input("Seed", value=int(config.DEFAULT_SEED), step=1, key="seed")
    missing = st.slider("Missing rate", min_value=0.0, max_value=0.9, value=0.3, step=0.05, key="missing_rate")
    fill = st.toggle("Fill degenerate centers", value=True, key="fill_degenerate")
    shuffle = st.toggle("Shuffle instances", value=True, key="shuffle")

    st.divider()

    st.markdown("**Observability**")
    st.caption(f"Experiment: `{config.MLFLOW_EXPERIMENT_NAME}`")
    st.caption(f"Tracing: {'enabled' if config.TRACING_ENABLED else 'disabled'}")
    st.caption(f"Logs: `{config.LOGS_PATH}`")

st.subheader("📁 Dataset")
source_kind = st.radio("Source", ["Synthetic", "Manifest"], horizontal=True, key="source_kind")

manifest_path = None
if source_kind == "Synthetic":
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        n_clusters = st.number_input("Clusters", min_value=1, value=3, step=1, key="syn_clusters")
    with col2:
        n_instances = st.number_input("Instances", min_value=2, value=600, step=50, key="syn_instances")
    with col3:
        dims_text = st.text_input("View dims", value="20, 20", key="syn_dims")
    with col4:
        noise = st.number_input("Noise", min_value=0.0, value=0.1, format="%g", key="syn_noise")
else:
    manifest_path = st.text_input("Manifest path", key="manifest_path")

if st.button("Run", type="primary", key="run_btn"):
    try:
        if source_kind == "Synthetic":
            dims = [int(d) for d in dims_text.replace(",", " ").split()]
            views, labels = make_synthetic(int(n_clusters), len(dims), dims, int(n_instances),
                                           separation=1.0, noise=float(noise), rng_seed=int(seed))
            dataset = MultiViewDataset(views, PresenceMask.full(len(dims), int(n_instances)), int(n_clusters), labels)
            if missing > 0:
                dataset = dataset.with_mask(simulate_missing(dataset.meta, float(missing), int(seed)))
            manifest_path = save_dataset(dataset, st.session_state.dataset_dir)
            rate = 0.0
        else:
            rate = float(missing)

        with st.spinner("Clustering..."):
            data = prepare_data(manifest_path=manifest_path, missing_rate=rate,
                                seed=int(seed), shuffle=bool(shuffle))
            cfg = SolverConfig(alpha=float(alpha), chunk_size=int(chunk_size), n_passes=int(passes),
                               rng_seed=int(seed), fill_degenerate=bool(fill))
            st.session_state.last_result = run_experiment(data, cfg, command="app")
        st.cache_data.clear()
    except Exception as e:
        st.error(f"Run failed: {e}")

result = st.session_state.last_result
if result is not None:
    st.subheader("📊 Results")
    final = result.final
    m1, m2, m3, m4 = st.columns(4)
    m1.metric("NMI", "-" if final.nmi is None else f"{final.nmi:.4f}")
    m2.metric("AC", "-" if final.ac is None else f"{final.ac:.4f}")
    m3.metric("Average loss", f"{final.average_loss:.4f}")
    m4.metric("Passes", result.config.n_passes)

    frame = records_frame([result], with_config=False)
    st.dataframe(frame, hide_index=True, use_container_width=True)
    st.line_chart(frame.set_index("pass")[["avg_loss"]])
    st.caption(f"Run `{result.run_id}`, log: `{result.log_file_path}`")

st.subheader("📋 Run History")
stored = fetch_stored_runs()
if "error" in stored:
    st.info(stored["error"])
elif stored.get("runs"):
    history = pd.DataFrame(stored["runs"])
    columns = [c for c in ["run_id", "command", "status", "final_nmi", "final_ac", "final_avg_loss", "created_at"]
               if c in history.columns]
    st.dataframe(history[columns], hide_index=True, use_container_width=True)
else:
    st.caption("No stored runs yet.")
