'''Console formatting of experiment reports.'''

from edgect.lib import util


def report_lines(rows):
    '''A generator returning lines for a list of report rows.

    rows are ReportRow instances as produced by the experiment runner.'''
    fmt = '{:<11} {:>14} {:>9} {:>7} {:>16}'
    yield fmt.format('Method', 'Rel. error', 'Time', 'Iters', 'Objective')
    for row in rows:
        if row.wall_time_seconds < 60:
            wall_time = '{:.2f}s'.format(row.wall_time_seconds)
        else:
            wall_time = util.formatted_time(row.wall_time_seconds, sep='')
        yield fmt.format(row.method,
                         '{:.4f}'.format(row.relative_error),
                         wall_time,
                         '{:,d}'.format(row.iterations),
                         '{:.6g}'.format(row.objective_value))


def sweep_lines(rows):
    '''A generator returning lines for sweep report rows.'''
    fmt = '{:<14} {:>10} {:<11} {:>11} {:>9} {:>7} {:>8}'
    yield fmt.format('Parameter', 'Value', 'Method', 'Rel. error', 'Time',
                     'Iters', 'Edges')
    for row in rows:
        yield fmt.format(row.parameter,
                         '{:g}'.format(row.value),
                         row.method,
                         '{:.4f}'.format(row.relative_error),
                         '{:.2f}s'.format(row.wall_time_seconds),
                         '{:,d}'.format(row.iterations),
                         '' if row.mask_edges is None else '{:,d}'.format(row.mask_edges))
