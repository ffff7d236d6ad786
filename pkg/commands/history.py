from commands import console, show_frame
from database import get_history, get_runs, init_db
from schemas import validate_table


def run_history(config, subcommand=None, export=None, run_id=None):
    init_db(config.history_db)
    if run_id is not None:
        events = get_history(run_id, config.history_db)
        if events.empty:
            console.print(f"No events recorded for run {run_id}.")
        else:
            show_frame(f"Run {run_id} events", events)
        return events
    runs = get_runs(subcommand, config.history_db)
    if runs.empty:
        console.print("No runs recorded.")
        return runs
    show_frame("Run history", runs)
    if export:
        validate_table("history", runs)
        runs.to_csv(export, index=False)
    return runs
