"""Command-line client for the inventory service.

Most commands are thin HTTP calls against a running gateway (``--url`` /
``UUIS_URL``, bearer token from ``uuis login`` via ``--token`` /
``UUIS_TOKEN``).  ``serve`` starts the gateway; ``backup --direct`` and
``restore`` operate on the storage files without a server.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from . import errors
from .backup import BackupService
from .service import ServiceConfig, UuisService
from .store import Store

EXIT_USAGE = 2
EXIT_AUTH = 3
EXIT_DENIED = 4
EXIT_NOT_FOUND = 5
EXIT_CONFLICT = 6
EXIT_SERVER = 7

_EXIT_BY_STATUS = {401: EXIT_AUTH, 423: EXIT_AUTH, 403: EXIT_DENIED,
                   404: EXIT_NOT_FOUND, 409: EXIT_CONFLICT}


class Remote:
    def __init__(self, url: str, token: str | None):
        self._client = httpx.Client(base_url=url.rstrip("/"), timeout=30.0)
        self._headers = {"Authorization": f"Bearer {token}"} if token else {}

    def call(self, method: str, path: str, *, confirm: bool = False, **kwargs):
        """One envelope round-trip; transparently completes two-phase calls."""
        try:
            resp = self._client.request(method, path, headers=self._headers,
                                        **kwargs)
        except httpx.HTTPError as exc:
            click.echo(f"cannot reach server: {exc}", err=True)
            sys.exit(EXIT_SERVER)
        body = resp.json()
        if resp.status_code == 202 and body.get("status") == "confirm":
            if not confirm:
                click.echo(f"refused: {body.get('preview')} "
                           "(re-run with --yes)", err=True)
                sys.exit(EXIT_CONFLICT)
            payload = dict(kwargs.get("json") or {})
            payload["confirm_token"] = body["confirmation_token"]
            return self.call(method, path, confirm=False, json=payload)
        if body.get("status") == "error":
            click.echo(f"{body.get('error_code')}: {body.get('detail')}",
                       err=True)
            sys.exit(_EXIT_BY_STATUS.get(resp.status_code, 1))
        return body.get("payload")


def _remote(ctx) -> Remote:
    return Remote(ctx.obj["url"], ctx.obj["token"])


def _emit(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@click.group()
@click.option("--url", envvar="UUIS_URL", default="http://127.0.0.1:8077",
              show_default=True, help="Gateway base URL.")
@click.option("--token", envvar="UUIS_TOKEN", default=None,
              help="Session token from 'uuis login'.")
@click.pass_context
def main(ctx, url, token):
    """University inventory client."""
    ctx.ensure_object(dict)
    ctx.obj.update(url=url, token=token)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON config file.")
def serve(config_path):
    """Run the HTTP gateway."""
    import uvicorn

    from .api import create_app

    config = ServiceConfig.load(config_path)
    service = UuisService(config)
    service.start_scheduler()
    try:
        uvicorn.run(create_app(service), host=config.host, port=config.port)
    finally:
        service.stop()


@main.command()
@click.argument("user_code")
@click.password_option("--password", confirmation_prompt=False)
@click.option("--challenge-answer", default=None)
@click.pass_context
def login(ctx, user_code, password, challenge_answer):
    """Authenticate and print a session token."""
    payload = _remote(ctx).call("POST", "/auth/login", json={
        "user_code": user_code, "password": password,
        "challenge_answer": challenge_answer})
    click.echo(payload["token"])


@main.command("import-users")
@click.argument("file", type=click.Path(exists=True))
@click.pass_context
def import_users(ctx, file):
    """Bulk-create accounts from a CSV file."""
    report = _remote(ctx).call("POST", "/users/import",
                               json={"csv_text": Path(file).read_text()})
    _emit(report)
    if report["rejected"]:
        sys.exit(1)


@main.command("bulk-add-assets")
@click.argument("file", type=click.Path(exists=True))
@click.option("--yes", is_flag=True, help="Confirm the import.")
@click.pass_context
def bulk_add_assets(ctx, file, yes):
    """Import assets from a CSV file (all rows or none)."""
    _emit(_remote(ctx).call("POST", "/assets/import", confirm=yes,
                            json={"csv_text": Path(file).read_text()}))


@main.command("unlock-user")
@click.argument("user_code")
@click.pass_context
def unlock_user(ctx, user_code):
    """Reset a locked account's failed-attempt counter."""
    _remote(ctx).call("POST", "/auth/unlock", json={"user_code": user_code})
    click.echo(f"unlocked {user_code}")


@main.command()
@click.argument("category")
@click.argument("key", required=False)
@click.option("--start", default=None, help="Range start for 'time'.")
@click.option("--end", default=None, help="Range end for 'time'.")
@click.pass_context
def audit(ctx, category, key, start, end):
    """Browse the audit log by category."""
    params = {"category": category}
    if key:
        params["key"] = key
    if start:
        params["start"] = start
    if end:
        params["end"] = end
    _emit(_remote(ctx).call("GET", "/audit/logs", params=params))


@main.command()
@click.argument("scope", default="all")
@click.option("--direct", is_flag=True,
              help="Run against the storage files, without a server.")
@click.option("--storage", type=click.Path(), default=None,
              help="Storage path for --direct mode.")
@click.option("--out", "out_dir", type=click.Path(), default="./backups",
              show_default=True, help="Backup directory for --direct mode.")
@click.pass_context
def backup(ctx, scope, direct, storage, out_dir):
    """Export the selected scope to verified CSV files."""
    if direct:
        service = BackupService(Store(storage), out_dir)
        try:
            manifest = service.run_backup_direct(scope)
        except errors.UuisError as exc:
            click.echo(f"{exc.code}: {exc.message}", err=True)
            sys.exit(1)
        click.echo(f"{manifest.backup_id} diff={manifest.diff_count} "
                   f"-> {manifest.directory}")
        return
    _emit(_remote(ctx).call("POST", "/backups", json={"scope": scope}))


@main.command()
@click.argument("directory", type=click.Path(exists=True))
@click.option("--storage", type=click.Path(), required=True,
              help="Target storage path; must be a fresh, empty store.")
def restore(directory, storage):
    """Load a backup directory into an empty store."""
    try:
        manifest = BackupService.read_manifest(directory)
        target = Store(storage)
        BackupService.restore_from_backup(manifest, target)
    except errors.UuisError as exc:
        click.echo(f"{exc.code}: {exc.message}", err=True)
        sys.exit(1)
    click.echo(f"restored {manifest.backup_id} into {storage}")


if __name__ == "__main__":
    main()
