# Generated by Django 4.2.26 on 2026-10-18 10:12

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='TrainingRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=128)),
                ('config_json', models.JSONField()),
                ('seed', models.IntegerField()),
                ('steps', models.IntegerField()),
                ('status', models.CharField(choices=[('running', 'running'), ('finished', 'finished'), ('failed', 'failed')], default='running', max_length=16)),
                ('params_path', models.CharField(blank=True, max_length=512, null=True)),
                ('log_path', models.CharField(blank=True, max_length=512, null=True)),
                ('final_loss', models.FloatField(blank=True, null=True)),
                ('error', models.TextField(blank=True, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
        ),
        migrations.CreateModel(
            name='TrainingStep',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('timestamp', models.DateTimeField(auto_now_add=True)),
                ('step', models.IntegerField()),
                ('loss', models.FloatField()),
                ('iteration_losses', models.JSONField()),
                ('flow_loss', models.FloatField()),
                ('grad_norm', models.FloatField()),
                ('exit_iteration', models.FloatField()),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='step_records', to='denoiser.trainingrun')),
            ],
            options={
                'ordering': ['step'],
            },
        ),
        migrations.AddConstraint(
            model_name='trainingstep',
            constraint=models.UniqueConstraint(fields=('run', 'step'), name='unique_run_step'),
        ),
    ]
