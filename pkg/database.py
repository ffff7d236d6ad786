import json
import sqlite3

import pandas as pd

DATABASE = "lab_history.db"


def init_db(database=DATABASE):
    with sqlite3.connect(database) as conn:
        cursor = conn.cursor()

        # One row per CLI invocation
        cursor.execute('''
        CREATE TABLE IF NOT EXISTS runs (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            subcommand TEXT,
            seed TEXT,         -- 64-bit unsigned, kept exact
            config TEXT,
            output_dir TEXT,
            exit_status INTEGER CHECK(exit_status >= 0),
            created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
        )''')

        # Events within a run (files written, failures)
        cursor.execute('''
        CREATE TABLE IF NOT EXISTS history (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            run_id INTEGER,
            action TEXT,       -- e.g., 'write', 'fail'
            details TEXT,
            timestamp TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
            FOREIGN KEY (run_id) REFERENCES runs(id)
        )''')
        conn.commit()


def log_run(subcommand, seed, config, output_dir, exit_status, database=DATABASE):
    with sqlite3.connect(database) as conn:
        cursor = conn.cursor()
        cursor.execute('''
        INSERT INTO runs (subcommand, seed, config, output_dir, exit_status)
        VALUES (?, ?, ?, ?, ?)
        ''', (subcommand, str(seed), json.dumps(config, sort_keys=True), str(output_dir), exit_status))
        conn.commit()
        return cursor.lastrowid


def log_history(run_id, action, details, database=DATABASE):
    with sqlite3.connect(database) as conn:
        conn.execute('''
        INSERT INTO history (run_id, action, details)
        VALUES (?, ?, ?)
        ''', (run_id, action, str(details)))
        conn.commit()


def get_runs(subcommand=None, database=DATABASE):
    query = "SELECT id, subcommand, seed, output_dir, exit_status, created_at FROM runs "
    params = []
    if subcommand:
        query += "WHERE subcommand = ? "
        params.append(subcommand)
    query += "ORDER BY id DESC"
    with sqlite3.connect(database) as conn:
        return pd.read_sql(query, conn, params=params)


def get_history(run_id, database=DATABASE):
    with sqlite3.connect(database) as conn:
        return pd.read_sql("SELECT action, details, timestamp FROM history WHERE run_id = ? ORDER BY id", conn, params=(run_id,))
