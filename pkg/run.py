from flask.cli import FlaskGroup

from fairbandits import create_app

cli = FlaskGroup(create_app=create_app, add_default_commands=False, add_version_option=False)

if __name__ == '__main__':
    cli()
